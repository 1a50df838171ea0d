//! In-memory labelled datasets and the seeded Gaussian-blob generator.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use super::TrainError;

/// Inputs in `[0, 1]^m`, one row per sample, and labels in `[0, classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Tensor,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn new(inputs: Tensor, labels: Vec<usize>, classes: usize) -> Result<Self, TrainError> {
        if inputs.shape().len() != 2 || inputs.rows() != labels.len() {
            return Err(TrainError::Config(alloc::format!(
                "{} labels for inputs of shape {:?}",
                labels.len(),
                inputs.shape()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(TrainError::Label(super::model::LabelError { label: bad, classes }));
        }
        if inputs.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(TrainError::Config("inputs must lie in [0, 1]".into()));
        }
        Ok(Dataset { inputs, labels, classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn sample(&self, i: usize) -> (&[f64], usize) {
        (self.inputs.row(i), self.labels[i])
    }

    /// Per-class input means; classes without samples get the zero vector.
    pub fn centroids(&self) -> Vec<Vec<f64>> {
        let mut sums = vec![vec![0.0; self.dim()]; self.classes];
        let mut counts = vec![0usize; self.classes];
        for i in 0..self.len() {
            let (x, y) = self.sample(i);
            counts[y] += 1;
            sums[y].iter_mut().zip(x).for_each(|(s, v)| *s += v);
        }
        for (s, c) in sums.iter_mut().zip(counts) {
            if c > 0 {
                s.iter_mut().for_each(|v| *v /= c as f64);
            }
        }
        sums
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlobSpec {
    pub classes: usize,
    pub dim: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    /// Standard deviation of each blob.
    pub spread: f64,
    pub seed: u64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        BlobSpec { classes: 3, dim: 2, train_per_class: 200, test_per_class: 100, spread: 0.1, seed: 7 }
    }
}

/// Isotropic Gaussian blobs with centres drawn uniformly from
/// `[0.25, 0.75]^dim`, clipped to the unit box. Samples are interleaved by
/// class. Returns `(train, test)`.
pub fn blobs(spec: &BlobSpec) -> Result<(Dataset, Dataset), TrainError> {
    if spec.classes < 2 || spec.dim == 0 || spec.spread.is_nan() || spec.spread <= 0.0 {
        return Err(TrainError::Config("blobs need at least two classes, one dimension and a positive spread".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centres: Vec<Vec<f64>> =
        (0..spec.classes).map(|_| (0..spec.dim).map(|_| rng.gen_range(0.25..0.75)).collect()).collect();
    let noise = Normal::new(0.0, spec.spread).expect("positive spread");
    let mut draw = |per_class: usize| {
        let mut data = Vec::with_capacity(per_class * spec.classes * spec.dim);
        let mut labels = Vec::with_capacity(per_class * spec.classes);
        for _ in 0..per_class {
            for (y, c) in centres.iter().enumerate() {
                data.extend(c.iter().map(|m| (m + noise.sample(&mut rng)).clamp(0.0, 1.0)));
                labels.push(y);
            }
        }
        let inputs = Tensor::from_vec(&[labels.len(), spec.dim], data).expect("sizes match");
        Dataset::new(inputs, labels, spec.classes)
    };
    let train = draw(spec.train_per_class)?;
    let test = draw(spec.test_per_class)?;
    Ok((train, test))
}
