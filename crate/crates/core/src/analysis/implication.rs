//! Derivatives of implications and their Modus Ponens / Modus Tollens
//! behaviour.

use alloc::vec::Vec;

use super::shadow::shadow_lifting_check;
use super::AnalysisError;
use crate::graph::Graph;
use crate::logic::{LogicConfig, LogicKind};
use crate::relax::Relaxation;

/// Open box `x_lo < x < x_hi`, `y_lo < y < y_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Region {
    pub const fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        Region { x_lo, x_hi, y_lo, y_hi }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > self.x_lo && x < self.x_hi && y > self.y_lo && y < self.y_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpMtConfig {
    /// Grid spacing; points sit at `x = (i + 1/2)h`, `y = (j + 1/4)h`, off
    /// the lines `x = y` and `x + y = 1`.
    pub spacing: f64,
    pub tau: f64,
    /// Modus Ponens needs `∂I/∂y ≥ τ` throughout this region…
    pub mp_confident: Region,
    /// …and `∂I/∂y ≤ τ` throughout this one.
    pub mp_doubtful: Region,
    /// Modus Tollens needs `∂I/∂x ≤ −τ` throughout this region.
    pub mt: Region,
    /// A partial counts as vanishing below this magnitude.
    pub vanish: f64,
    /// Side of the square grid used for DL2, whose truth values are unbounded.
    pub dl2_extent: f64,
}

impl Default for MpMtConfig {
    fn default() -> Self {
        MpMtConfig {
            spacing: 0.005,
            tau: 0.05,
            mp_confident: Region::new(0.9, 1.0, 0.0, 0.5),
            mp_doubtful: Region::new(0.0, 0.05, 0.0, 0.5),
            mt: Region::new(0.9, 1.0, 0.0, 0.1),
            vanish: 1e-9,
            dl2_extent: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeReport {
    pub logic: LogicKind,
    pub points: Vec<GridPoint>,
    /// Fraction of the grid where both partials vanish.
    pub vanishing_fraction: f64,
    pub vanishing_dx_fraction: f64,
    pub vanishing_dy_fraction: f64,
    pub mp_confident_min_dy: f64,
    pub mp_doubtful_max_dy: f64,
    pub mt_max_dx: f64,
    /// `None` for DL2, which is only described.
    pub mp_following: Option<bool>,
    pub mt_following: Option<bool>,
    pub shadow_lifting: bool,
}

/// Differentiates `x → y` on a grid and classifies it.
pub fn mp_mt_analysis(logic: &LogicConfig, cfg: &MpMtConfig) -> Result<DerivativeReport, AnalysisError> {
    let rx = Relaxation::new(*logic)?;
    let mut g = Graph::new();
    let (a, b) = (g.input(), g.input());
    let root = if rx.is_fuzzy() {
        rx.implies(&mut g, a, b)?
    } else {
        // ¬x ∨ y with the negated antecedent taken as 1 − x
        let na = g.one_minus(a);
        rx.or(&mut g, na, b)
    };
    let extent = if rx.is_fuzzy() { 1.0 } else { cfg.dl2_extent };
    let n = libm::round(extent / cfg.spacing) as usize;
    let h = extent / n as f64;
    let mut points = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.25) * h);
            g.eval(root, &[x, y])?;
            let d = g.backward(root);
            points.push(GridPoint { x, y, dx: d[0], dy: d[1] });
        }
    }
    let total = points.len() as f64;
    let frac = |f: &dyn Fn(&GridPoint) -> bool| points.iter().filter(|p| f(p)).count() as f64 / total;
    let v = cfg.vanish;
    let vanishing_fraction = frac(&|p| p.dx.abs() < v && p.dy.abs() < v);
    let vanishing_dx_fraction = frac(&|p| p.dx.abs() < v);
    let vanishing_dy_fraction = frac(&|p| p.dy.abs() < v);
    let over = |r: &Region, f: fn(&GridPoint) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
        points.iter().filter(|p| r.contains(p.x, p.y)).map(f).fold(init, pick)
    };
    let mp_confident_min_dy = over(&cfg.mp_confident, |p| p.dy, f64::INFINITY, f64::min);
    let mp_doubtful_max_dy = over(&cfg.mp_doubtful, |p| p.dy, f64::NEG_INFINITY, f64::max);
    let mt_max_dx = over(&cfg.mt, |p| p.dx, f64::NEG_INFINITY, f64::max);
    let (mp_following, mt_following) = if rx.is_fuzzy() {
        (
            Some(mp_confident_min_dy >= cfg.tau && mp_doubtful_max_dy <= cfg.tau),
            Some(mt_max_dx <= -cfg.tau),
        )
    } else {
        (None, None)
    };
    let shadow_lifting = shadow_lifting_check(logic, super::shadow::MIN_RHO_SAMPLES)?.holds;
    Ok(DerivativeReport {
        logic: logic.kind,
        points,
        vanishing_fraction,
        vanishing_dx_fraction,
        vanishing_dy_fraction,
        mp_confident_min_dy,
        mp_doubtful_max_dy,
        mt_max_dx,
        mp_following,
        mt_following,
        shadow_lifting,
    })
}
