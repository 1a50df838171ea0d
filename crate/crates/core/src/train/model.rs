//! A feed-forward classifier with dense layers and a softmax output, and
//! hand-written per-sample backpropagation.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{ShapeError, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `out × in`.
    pub weights: Tensor,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub layers: Vec<Dense>,
}

/// Parameter gradients, shaped like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Tensor, Vec<f64>)>,
}

impl Gradients {
    pub fn zeros_like(m: &Model) -> Self {
        Gradients {
            layers: m.layers.iter().map(|l| (Tensor::zeros(l.weights.shape()), vec![0.0; l.outputs()])).collect(),
        }
    }

    pub fn axpy(&mut self, k: f64, other: &Gradients) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            w.axpy(k, ow);
            b.iter_mut().zip(ob).for_each(|(x, y)| *x += k * y);
        }
    }

    pub fn scale(&mut self, k: f64) {
        for (w, b) in &mut self.layers {
            w.scale(k);
            b.iter_mut().for_each(|x| *x *= k);
        }
    }

    /// Euclidean norm of the last layer's weight gradient.
    pub fn last_layer_norm(&self) -> f64 {
        self.layers.last().map_or(0.0, |(w, _)| w.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|(w, b)| w.is_finite() && b.iter().all(|v| v.is_finite()))
    }
}

/// Activations of one forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    /// Input of each layer; the last entry is the logits.
    pub values: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
}

impl Trace {
    pub fn logits(&self) -> &[f64] {
        self.values.last().expect("non-empty trace")
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| libm::exp(z - m)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Pulls a gradient on the probabilities back to the logits.
pub fn softmax_backward(probs: &[f64], dprobs: &[f64]) -> Vec<f64> {
    let dot: f64 = probs.iter().zip(dprobs).map(|(p, d)| p * d).sum();
    probs.iter().zip(dprobs).map(|(p, d)| p * (d - dot)).collect()
}

impl Model {
    /// Glorot-uniform weights, zero biases; ReLU on hidden layers.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Self {
        assert!(sizes.len() >= 2, "a model needs input and output sizes");
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
                let data = (0..fan_in * fan_out).map(|_| rng.gen_range(-limit..limit)).collect();
                let activation = if i + 2 == sizes.len() { Activation::Identity } else { Activation::Relu };
                Dense {
                    weights: Tensor::from_vec(&[fan_out, fan_in], data).expect("sizes match"),
                    bias: vec![0.0; fan_out],
                    activation,
                }
            })
            .collect();
        Model { layers }
    }

    /// All-zero parameters; outputs the uniform distribution.
    pub fn zeros(sizes: &[usize]) -> Self {
        let mut m = Model { layers: Vec::new() };
        for (i, w) in sizes.windows(2).enumerate() {
            let activation = if i + 2 == sizes.len() { Activation::Identity } else { Activation::Relu };
            m.layers.push(Dense { weights: Tensor::zeros(&[w[1], w[0]]), bias: vec![0.0; w[1]], activation });
        }
        m
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn classes(&self) -> usize {
        self.layers.last().expect("non-empty model").outputs()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn trace(&self, x: &[f64]) -> Trace {
        let mut values = Vec::with_capacity(self.layers.len() + 1);
        values.push(x.to_vec());
        for l in &self.layers {
            let mut z = vec![0.0; l.outputs()];
            l.weights.matvec(values.last().unwrap(), &mut z);
            for (v, b) in z.iter_mut().zip(&l.bias) {
                *v += b;
                if l.activation == Activation::Relu && *v < 0.0 {
                    *v = 0.0;
                }
            }
            values.push(z);
        }
        let probs = softmax(values.last().unwrap());
        Trace { values, probs }
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.trace(x).probs
    }

    /// Probabilities for every row of a `m × d` batch.
    pub fn forward(&self, batch: &Tensor) -> Result<Tensor, ShapeError> {
        if batch.shape().len() != 2 || batch.cols() != self.input_dim() {
            return Err(ShapeError { expected: vec![batch.shape()[0], self.input_dim()], got: batch.shape().to_vec() });
        }
        let rows: Vec<Vec<f64>> = (0..batch.rows()).map(|i| self.predict(batch.row(i))).collect();
        Tensor::from_rows(&rows)
    }

    /// Backpropagates a gradient on the logits; accumulates parameter
    /// gradients into `grads` (if given) and returns the input gradient.
    pub fn backward(&self, trace: &Trace, dlogits: &[f64], mut grads: Option<&mut Gradients>) -> Vec<f64> {
        let mut delta = dlogits.to_vec();
        for (i, l) in self.layers.iter().enumerate().rev() {
            let out = &trace.values[i + 1];
            if l.activation == Activation::Relu {
                // the stored output is post-ReLU; zero means inactive
                for (d, o) in delta.iter_mut().zip(out) {
                    if *o <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let input = &trace.values[i];
            if let Some(g) = grads.as_deref_mut() {
                let (gw, gb) = &mut g.layers[i];
                let c = input.len();
                for (r, d) in delta.iter().enumerate() {
                    if *d != 0.0 {
                        for (w, x) in gw.data_mut()[r * c..(r + 1) * c].iter_mut().zip(input) {
                            *w += d * x;
                        }
                    }
                    gb[r] += d;
                }
            }
            let mut prev = vec![0.0; l.inputs()];
            l.weights.matvec_t(&delta, &mut prev);
            delta = prev;
        }
        delta
    }

    /// `θ -= lr · g`.
    pub fn step(&mut self, lr: f64, g: &Gradients) {
        for (l, (gw, gb)) in self.layers.iter_mut().zip(&g.layers) {
            l.weights.axpy(-lr, gw);
            l.bias.iter_mut().zip(gb).for_each(|(b, d)| *b -= lr * d);
        }
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.data());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<(), ShapeError> {
        if params.len() != self.parameter_count() {
            return Err(ShapeError { expected: vec![self.parameter_count()], got: vec![params.len()] });
        }
        let mut it = params.iter();
        for l in &mut self.layers {
            for w in l.weights.data_mut() {
                *w = *it.next().unwrap();
            }
            for b in &mut l.bias {
                *b = *it.next().unwrap();
            }
        }
        Ok(())
    }
}

/// Mean of `−ln p_true`, with probabilities floored at 1e-12.
pub fn cross_entropy(probs: &Tensor, labels: &[usize]) -> Result<f64, LabelError> {
    let n = probs.cols();
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        if y >= n {
            return Err(LabelError { label: y, classes: n });
        }
        total -= libm::log(probs.get(i, y).max(1e-12));
    }
    Ok(total / labels.len() as f64)
}

/// Gradient of `−ln softmax(z)_y` with respect to the logits.
pub fn cross_entropy_grad(probs: &[f64], label: usize) -> Vec<f64> {
    let mut d = probs.to_vec();
    d[label] -= 1.0;
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelError {
    pub label: usize,
    pub classes: usize,
}

impl core::fmt::Display for LabelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "label {} out of range for {} classes", self.label, self.classes)
    }
}

impl core::error::Error for LabelError {}
