//! Counterexample search by projected sign-gradient ascent.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::constraint::{ConstraintEval, Evaluation, Point};
use super::model::Model;
use super::TrainError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PgdConfig {
    pub steps: usize,
    /// Defaults to ε/8.
    pub step_size: Option<f64>,
    pub restarts: usize,
}

impl Default for PgdConfig {
    fn default() -> Self {
        PgdConfig { steps: 20, step_size: None, restarts: 1 }
    }
}

impl PgdConfig {
    pub fn step(&self, epsilon: f64) -> f64 {
        self.step_size.unwrap_or(epsilon / 8.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attack {
    pub x: Vec<f64>,
    pub initial: Evaluation,
    pub best: Evaluation,
}

/// Clamps `x` into the ℓ∞ ball of radius `eps` around `x0`, intersected
/// with the unit box.
pub fn project(x: &mut [f64], x0: &[f64], eps: f64) {
    for (v, c) in x.iter_mut().zip(x0) {
        *v = v.clamp(c - eps, c + eps).clamp(0.0, 1.0);
    }
}

fn better(a: &Evaluation, b: &Evaluation) -> bool {
    a.loss > b.loss || (a.loss == b.loss && a.margin > b.margin)
}

/// Searches the ε-ball around `x0` for a point maximising the constraint
/// loss, and returns the best iterate (possibly `x0` itself).
///
/// Each restart begins at a uniform random point of the ball and takes
/// `steps` signed-gradient steps. Where the loss gradient vanishes the
/// violation margin's gradient is followed instead. `observe` sees every
/// iterate, including the start.
pub fn pgd_attack(
    model: &Model,
    x0: &[f64],
    eval: &mut ConstraintEval,
    cfg: &PgdConfig,
    rng: &mut impl Rng,
    mut observe: impl FnMut(&[f64]),
) -> Result<Attack, TrainError> {
    let eps = eval.epsilon();
    let alpha = cfg.step(eps);
    let clean = model.trace(x0);
    let initial = eval.evaluate(Point { p0: &clean.probs, padv: &clean.probs, x0, xadv: x0 })?;
    let mut best = (x0.to_vec(), initial);
    if cfg.steps == 0 {
        return Ok(Attack { x: best.0, initial, best: initial });
    }
    for _ in 0..cfg.restarts.max(1) {
        let mut x: Vec<f64> = x0.iter().map(|c| c + rng.gen_range(-eps..=eps)).collect();
        project(&mut x, x0, eps);
        for step in 0..=cfg.steps {
            observe(&x);
            let adv = model.trace(&x);
            let e = eval.evaluate(Point { p0: &clean.probs, padv: &adv.probs, x0, xadv: &x })?;
            if better(&e, &best.1) {
                best = (x.clone(), e);
            }
            if step == cfg.steps {
                break;
            }
            let mut d = eval.loss_gradient();
            if d.is_zero() {
                d = eval.margin_gradient();
            }
            let grad = eval.input_gradient(model, &adv, &d);
            for (v, g) in x.iter_mut().zip(&grad) {
                if *g > 0.0 {
                    *v += alpha;
                } else if *g < 0.0 {
                    *v -= alpha;
                }
            }
            project(&mut x, x0, eps);
        }
    }
    Ok(Attack { x: best.0, initial, best: best.1 })
}
