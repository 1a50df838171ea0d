//! Dataset files: CSV with a `label,f0,f1,…` header and IDX image/label
//! pairs.

use std::fs;
use std::path::{Path, PathBuf};

use dlc_core::train::{blobs, BlobSpec, Dataset, Tensor};

use crate::error::{Error, Result};

pub const IDX_IMAGES: u32 = 0x0000_0803;
pub const IDX_LABELS: u32 = 0x0000_0801;

/// Where a train/test pair comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Blobs(BlobSpec),
    Csv { train: PathBuf, test: PathBuf },
    Idx { train_images: PathBuf, train_labels: PathBuf, test_images: PathBuf, test_labels: PathBuf },
}

/// Raw rows before normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    let header = reader.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
    if header.get(0) != Some("label") {
        return Err(Error::format(path, "header must start with `label`"));
    }
    for (i, name) in header.iter().skip(1).enumerate() {
        if name != format!("f{i}") {
            return Err(Error::format(path, format!("column {} is `{name}`, expected `f{i}`", i + 1)));
        }
    }
    let width = header.len() - 1;
    if width == 0 {
        return Err(Error::format(path, "no feature columns"));
    }
    let mut table = Table { rows: Vec::new(), labels: Vec::new() };
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, e.to_string()))?;
        let at = |m: String| Error::format(path, format!("row {}: {m}", line + 1));
        let label = record[0].trim().parse::<usize>().map_err(|e| at(format!("label: {e}")))?;
        let row = record
            .iter()
            .skip(1)
            .map(|v| v.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| at("non-numeric feature".into()))?;
        table.labels.push(label);
        table.rows.push(row);
    }
    Ok(table)
}

fn be_u32(bytes: &[u8], at: usize) -> Option<u32> {
    Some(u32::from_be_bytes(bytes.get(at..at + 4)?.try_into().ok()?))
}

/// Reads an unsigned-byte IDX file and returns its dimensions and payload.
fn read_idx(path: &Path, magic: u32) -> Result<(Vec<usize>, Vec<u8>)> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    let found = be_u32(&bytes, 0).ok_or_else(|| Error::format(path, "truncated header"))?;
    if found != magic {
        return Err(Error::format(path, format!("magic {found:#010x}, expected {magic:#010x}")));
    }
    let ndim = (magic & 0xff) as usize;
    let dims = (0..ndim)
        .map(|i| be_u32(&bytes, 4 + 4 * i).map(|d| d as usize))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::format(path, "truncated header"))?;
    let start = 4 + 4 * ndim;
    let len: usize = dims.iter().product();
    if bytes.len() != start + len {
        return Err(Error::format(path, format!("expected {len} data bytes, found {}", bytes.len().saturating_sub(start))));
    }
    Ok((dims, bytes[start..].to_vec()))
}

/// Images scaled to `[0, 1]` by 1/255, flattened row-major, with labels.
pub fn read_idx_pair(images: &Path, labels: &Path) -> Result<Table> {
    let (dims, pixels) = read_idx(images, IDX_IMAGES)?;
    let (ldims, ls) = read_idx(labels, IDX_LABELS)?;
    if dims[0] != ldims[0] {
        return Err(Error::format(labels, format!("{} labels for {} images", ldims[0], dims[0])));
    }
    let width = dims[1] * dims[2];
    let rows = if width == 0 {
        vec![Vec::new(); dims[0]]
    } else {
        pixels.chunks(width).map(|c| c.iter().map(|&p| p as f64 / 255.0).collect()).collect()
    };
    Ok(Table { rows, labels: ls.into_iter().map(usize::from).collect() })
}

/// Writes an IDX pair; used for fixtures and exports.
pub fn write_idx_pair(images: &Path, labels: &Path, rows: usize, cols: usize, pixels: &[u8], ls: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(16 + pixels.len());
    for v in [IDX_IMAGES, ls.len() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    fs::write(images, out).map_err(Error::io(images))?;
    let mut out = Vec::with_capacity(8 + ls.len());
    for v in [IDX_LABELS, ls.len() as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(ls);
    fs::write(labels, out).map_err(Error::io(labels))
}

/// Per-feature affine map into `[0, 1]`, fitted on a training table.
/// Identity when the training inputs already lie in the unit box.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaling {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaling {
    pub fn fit(t: &Table) -> Option<Scaling> {
        if t.rows.iter().flatten().all(|v| (0.0..=1.0).contains(v)) {
            return None;
        }
        let width = t.rows.first().map_or(0, |r| r.len());
        let mut min = vec![f64::INFINITY; width];
        let mut max = vec![f64::NEG_INFINITY; width];
        for r in &t.rows {
            for (i, v) in r.iter().enumerate() {
                min[i] = min[i].min(*v);
                max[i] = max[i].max(*v);
            }
        }
        Some(Scaling { min, max })
    }

    pub fn apply(&self, v: f64, i: usize) -> f64 {
        let span = self.max[i] - self.min[i];
        if span > 0.0 {
            ((v - self.min[i]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}

fn to_dataset(t: Table, classes: usize, scaling: Option<&Scaling>, path: &Path) -> Result<Dataset> {
    let width = t.rows.first().map_or(0, |r| r.len());
    let mut data = Vec::with_capacity(t.rows.len() * width);
    for r in &t.rows {
        if r.len() != width {
            return Err(Error::format(path, "rows of different widths"));
        }
        match scaling {
            Some(s) => data.extend(r.iter().enumerate().map(|(i, v)| s.apply(*v, i))),
            None => data.extend(r.iter().map(|v| v.clamp(0.0, 1.0))),
        }
    }
    let inputs = Tensor::from_vec(&[t.rows.len(), width], data).map_err(|e| Error::format(path, e.to_string()))?;
    Dataset::new(inputs, t.labels, classes).map_err(|e| Error::format(path, e.to_string()))
}

fn pair(train: Table, test: Table, classes: Option<usize>, paths: (&Path, &Path)) -> Result<(Dataset, Dataset)> {
    let width = |t: &Table| t.rows.first().map(|r| r.len());
    if let (Some(a), Some(b)) = (width(&train), width(&test)) {
        if a != b {
            return Err(Error::format(paths.1, format!("{b} features, training set has {a}")));
        }
    }
    let seen = train.labels.iter().chain(&test.labels).max().map_or(0, |m| m + 1);
    let classes = match classes {
        Some(c) if seen > c => {
            return Err(Error::Invalid(format!("label {} out of range for {c} classes", seen - 1)));
        }
        Some(c) => c,
        None => seen.max(2),
    };
    let scaling = Scaling::fit(&train);
    Ok((to_dataset(train, classes, scaling.as_ref(), paths.0)?, to_dataset(test, classes, scaling.as_ref(), paths.1)?))
}

/// Loads a `(train, test)` pair with inputs in `[0, 1]^m` and labels in
/// `[0, classes)`. `classes` defaults to one more than the largest label.
pub fn load_dataset(source: &Source, classes: Option<usize>) -> Result<(Dataset, Dataset)> {
    match source {
        Source::Blobs(spec) => Ok(blobs(spec)?),
        Source::Csv { train, test } => pair(read_csv(train)?, read_csv(test)?, classes, (train, test)),
        Source::Idx { train_images, train_labels, test_images, test_labels } => pair(
            read_idx_pair(train_images, train_labels)?,
            read_idx_pair(test_images, test_labels)?,
            classes,
            (train_images, test_images),
        ),
    }
}

/// Writes a dataset as CSV with a `label,f0,…` header.
pub fn write_csv(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    let mut header = vec!["label".to_string()];
    header.extend((0..data.dim()).map(|i| format!("f{i}")));
    w.write_record(&header).map_err(|e| Error::format(path, e.to_string()))?;
    for i in 0..data.len() {
        let (x, y) = data.sample(i);
        let mut rec = vec![y.to_string()];
        rec.extend(x.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(|e| Error::format(path, e.to_string()))?;
    }
    w.flush().map_err(Error::io(path))
}
