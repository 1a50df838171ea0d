//! Model checkpoints: `DLCM`, a little-endian `u32` count of layer sizes,
//! the sizes as `u32`, then every parameter as a little-endian `f64` in
//! [`Model::parameters`] order. Hidden layers are ReLU, the last identity.

use std::fs;
use std::path::Path;

use dlc_core::train::Model;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DLCM";

pub fn layer_sizes(model: &Model) -> Vec<usize> {
    let mut sizes = vec![model.input_dim()];
    sizes.extend(model.layers.iter().map(|l| l.outputs()));
    sizes
}

pub fn encode(model: &Model) -> Vec<u8> {
    let sizes = layer_sizes(model);
    let params = model.parameters();
    let mut out = Vec::with_capacity(8 + 4 * sizes.len() + 8 * params.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
    for s in &sizes {
        out.extend_from_slice(&(*s as u32).to_le_bytes());
    }
    for p in params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<Model, String> {
    let u32_at = |at: usize| -> std::result::Result<usize, String> {
        let b = bytes.get(at..at + 4).ok_or("truncated header")?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()) as usize)
    };
    if bytes.get(..4) != Some(MAGIC.as_slice()) {
        return Err("not a model checkpoint".into());
    }
    let n = u32_at(4)?;
    if n < 2 {
        return Err("a model needs at least two layer sizes".into());
    }
    let sizes = (0..n).map(|i| u32_at(8 + 4 * i)).collect::<std::result::Result<Vec<_>, _>>()?;
    if sizes.contains(&0) {
        return Err("zero-width layer".into());
    }
    let body = &bytes[8 + 4 * n..];
    let mut model = Model::zeros(&sizes);
    if body.len() != 8 * model.parameter_count() {
        return Err(format!("expected {} parameters, found {} bytes", model.parameter_count(), body.len()));
    }
    let params: Vec<f64> = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    model.set_parameters(&params).map_err(|e| e.to_string())?;
    Ok(model)
}

pub fn save(path: &Path, model: &Model) -> Result<()> {
    fs::write(path, encode(model)).map_err(Error::io(path))
}

pub fn load(path: &Path) -> Result<Model> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    decode(&bytes).map_err(|m| Error::format(path, m))
}
