//! Two-task GradNorm weighting of the cross-entropy and constraint losses.

use core::fmt;

use serde::{Deserialize, Serialize};

pub const LAMBDA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradNormConfig {
    pub enabled: bool,
    /// Asymmetry: how strongly slower tasks are favoured.
    pub alpha: f64,
    pub weight_lr: f64,
    /// Initial constraint weight; the cross-entropy weight is `2 − lambda_c`.
    pub lambda_c: f64,
}

impl Default for GradNormConfig {
    fn default() -> Self {
        GradNormConfig { enabled: true, alpha: 0.1, weight_lr: 0.025, lambda_c: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradNormState {
    pub lambda_ce: f64,
    pub lambda_c: f64,
    /// Task losses `[ce, c]` at the first update.
    pub initial: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradNormError {
    NonFinite,
}

impl fmt::Display for GradNormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("non-finite loss or gradient norm")
    }
}

impl core::error::Error for GradNormError {}

impl GradNormState {
    pub fn new(lambda_c: f64) -> Self {
        let lambda_c = lambda_c.clamp(LAMBDA_FLOOR, 2.0 - LAMBDA_FLOOR);
        GradNormState { lambda_ce: 2.0 - lambda_c, lambda_c, initial: None }
    }

    pub fn weights(&self) -> [f64; 2] {
        [self.lambda_ce, self.lambda_c]
    }

    /// Gradient-norm targets `Ḡ · r_i^α` for the given losses and norms.
    pub fn targets(&self, losses: [f64; 2], norms: [f64; 2], alpha: f64) -> [f64; 2] {
        let w = self.weights();
        let g = [w[0] * norms[0], w[1] * norms[1]];
        let mean = (g[0] + g[1]) / 2.0;
        let init = self.initial.unwrap_or(losses);
        let ratio = |i: usize| if init[i] > 1e-12 { losses[i] / init[i] } else { 1.0 };
        let r = [ratio(0), ratio(1)];
        let rm = (r[0] + r[1]) / 2.0;
        let rel = |i: usize| if rm > 0.0 { r[i] / rm } else { 1.0 };
        [mean * libm::pow(rel(0), alpha), mean * libm::pow(rel(1), alpha)]
    }
}

/// One GradNorm step on the loss weights.
///
/// `norms[i]` is `‖∇_W L_i‖` for the shared weights `W`. The weights move
/// by one gradient step on `Σ |λ_i ‖∇L_i‖ − target_i|` with the targets held
/// fixed, are floored at [`LAMBDA_FLOOR`] and rescaled to sum to 2. The
/// first call records the initial losses.
pub fn gradnorm_update(
    state: &GradNormState,
    losses: [f64; 2],
    norms: [f64; 2],
    alpha: f64,
    lr: f64,
) -> Result<GradNormState, GradNormError> {
    if losses.iter().chain(&norms).any(|v| !v.is_finite()) {
        return Err(GradNormError::NonFinite);
    }
    let mut next = *state;
    if next.initial.is_none() {
        next.initial = Some(losses);
    }
    let target = next.targets(losses, norms, alpha);
    let mut w = next.weights();
    for i in 0..2 {
        let diff = w[i] * norms[i] - target[i];
        let sign = if diff > 0.0 {
            1.0
        } else if diff < 0.0 {
            -1.0
        } else {
            0.0
        };
        w[i] = (w[i] - lr * sign * norms[i]).max(LAMBDA_FLOOR);
    }
    let lambda_ce = (2.0 * w[0] / (w[0] + w[1])).clamp(LAMBDA_FLOOR, 2.0 - LAMBDA_FLOOR);
    next.lambda_ce = lambda_ce;
    next.lambda_c = 2.0 - lambda_ce;
    Ok(next)
}
