//! Shadow-lifting: does raising either conjunct of `ρ ∧ ρ` raise the
//! conjunction?

use alloc::vec::Vec;

use super::AnalysisError;
use crate::graph::Graph;
use crate::logic::{LogicConfig, LogicKind, TNorm};
use crate::relax::Relaxation;

pub const MIN_RHO_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowSample {
    pub rho: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowLifting {
    pub logic: LogicKind,
    pub holds: bool,
    pub samples: Vec<ShadowSample>,
    /// Samples where some partial is not strictly positive.
    pub witnesses: Vec<ShadowSample>,
}

impl ShadowLifting {
    pub fn min_partial(&self) -> f64 {
        self.samples.iter().map(|s| s.d1.min(s.d2)).fold(f64::INFINITY, f64::min)
    }
}

/// Points in `(0, 1)` where the conjunction of `ρ` with itself has a kink.
fn kinks(logic: &LogicConfig) -> Vec<f64> {
    match logic.operators().ok().map(|o| o.tnorm) {
        Some(TNorm::Lukasiewicz) => alloc::vec![0.5],
        Some(TNorm::Yager { p }) => alloc::vec![1.0 - libm::pow(2.0, -1.0 / p)],
        _ => Vec::new(),
    }
}

pub fn rho_grid(logic: &LogicConfig, n: usize) -> Vec<f64> {
    let k = kinks(logic);
    (0..n)
        .map(|i| {
            let rho = (i as f64 + 0.5) / n as f64;
            if k.iter().any(|c| (rho - c).abs() < 1e-6) {
                rho + 0.25 / n as f64
            } else {
                rho
            }
        })
        .collect()
}

/// Differentiates the lowered conjunction at `x₁ = x₂ = ρ` for `rho_samples`
/// evenly spaced `ρ`. Holds iff both partials are positive at every sample.
pub fn shadow_lifting_check(logic: &LogicConfig, rho_samples: usize) -> Result<ShadowLifting, AnalysisError> {
    if rho_samples < MIN_RHO_SAMPLES {
        return Err(AnalysisError::Budget { min: MIN_RHO_SAMPLES, got: rho_samples });
    }
    let rx = Relaxation::new(*logic)?;
    let mut g = Graph::new();
    let (a, b) = (g.input(), g.input());
    let root = rx.and(&mut g, a, b);
    let mut samples = Vec::with_capacity(rho_samples);
    for rho in rho_grid(logic, rho_samples) {
        g.eval(root, &[rho, rho])?;
        let grad = g.backward(root);
        samples.push(ShadowSample { rho, d1: grad[0], d2: grad[1] });
    }
    let witnesses: Vec<ShadowSample> = samples.iter().copied().filter(|s| !(s.d1 > 0.0 && s.d2 > 0.0)).collect();
    Ok(ShadowLifting { logic: logic.kind, holds: witnesses.is_empty(), samples, witnesses })
}
