//! Finite-difference checks of every operator of a logic and of the
//! standard constraint losses through a small network.
//!
//! Errors are `|analytic − numeric| / max(1, |numeric|)` with central
//! differences of step 1e-6. Operator points are drawn from `(0.01, 0.99)²`
//! away from the kinks of the piecewise operators.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, NodeId};
use crate::logic::LogicConfig;
use crate::relax::Relaxation;
use crate::train::{ConstraintConfig, ConstraintEval, ConstraintKind, Gradients, Model, TrainError};

pub const OPERATOR_TOLERANCE: f64 = 1e-5;
pub const NETWORK_TOLERANCE: f64 = 1e-4;
const STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub points: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub logic: LogicConfig,
    pub checks: Vec<Check>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn max_error(&self) -> f64 {
        self.checks.iter().map(|c| c.max_error).fold(0.0, f64::max)
    }
}

fn error(analytic: f64, numeric: f64) -> f64 {
    libm::fabs(analytic - numeric) / libm::fabs(numeric).max(1.0)
}

fn near_kink(x: f64, y: f64) -> bool {
    let d = 2e-3;
    let sq = |v: f64| v * v;
    libm::fabs(x - y) < d
        || libm::fabs(x + y - 1.0) < d
        || libm::fabs(sq(1.0 - x) + sq(1.0 - y) - 1.0) < d
        || libm::fabs(sq(x) + sq(y) - 1.0) < d
}

type Build = fn(&Relaxation, &mut Graph, NodeId, NodeId) -> Result<NodeId, TrainError>;

fn operator(rx: &Relaxation, name: &str, build: Build, points: &[(f64, f64)]) -> Result<Check, TrainError> {
    let mut g = Graph::new();
    let (a, b) = (g.input(), g.input());
    let root = build(rx, &mut g, a, b)?;
    let mut worst: f64 = 0.0;
    for &(x, y) in points {
        g.eval(root, &[x, y])?;
        let grad = g.backward(root);
        let fd = g.finite_diff(root, &[x, y], STEP)?;
        for (ad, nd) in grad.iter().zip(&fd) {
            worst = worst.max(error(*ad, *nd));
        }
    }
    Ok(Check { name: name.into(), points: points.len(), max_error: worst, tolerance: OPERATOR_TOLERANCE })
}

/// Constraint configurations checked through the network, for 3 classes.
fn network_constraints() -> [ConstraintConfig; 3] {
    [
        ConstraintConfig { kind: ConstraintKind::Robustness, delta: 0.01, ..Default::default() },
        ConstraintConfig { kind: ConstraintKind::Groups, delta: 0.2, groups: vec![vec![0, 1], vec![2]], ..Default::default() },
        ConstraintConfig {
            kind: ConstraintKind::ClassSimilarity,
            triples: vec![[0, 1, 2], [1, 0, 2], [2, 1, 0]],
            ..Default::default()
        },
    ]
}

fn network(logic: LogicConfig, cfg: &ConstraintConfig, rng: &mut ChaCha8Rng, cases: usize) -> Result<Check, TrainError> {
    let (dim, classes) = (4, 3);
    let c = cfg.build(classes)?;
    let mut eval = ConstraintEval::new(&c, logic, &cfg.group_table(), classes, dim)?;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let model = Model::new(&[dim, 8, classes], rng);
        let x0: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.1..0.9)).collect();
        let xadv: Vec<f64> = x0.iter().map(|v| v + rng.gen_range(-cfg.epsilon..cfg.epsilon)).collect();
        let mut grads = Gradients::zeros_like(&model);
        eval.accumulate(&model, &model.trace(&x0), &model.trace(&xadv), &x0, &xadv, 1.0, &mut grads)?;
        let flat: Vec<f64> = grads.layers.iter().flat_map(|(w, b)| w.data().iter().chain(b.iter()).copied()).collect();
        let params = model.parameters();
        let mut shifted = model.clone();
        for _ in 0..5 {
            let k = rng.gen_range(0..params.len());
            let mut p = params.clone();
            let mut at = |v: f64, p: &mut Vec<f64>| -> Result<f64, TrainError> {
                p[k] = v;
                shifted.set_parameters(p)?;
                Ok(eval.evaluate_model(&shifted, &x0, &xadv)?.loss)
            };
            let up = at(params[k] + STEP, &mut p)?;
            let down = at(params[k] - STEP, &mut p)?;
            worst = worst.max(error(flat[k], (up - down) / (2.0 * STEP)));
        }
    }
    Ok(Check {
        name: alloc::format!("{} loss", cfg.kind),
        points: cases * 5,
        max_error: worst,
        tolerance: NETWORK_TOLERANCE,
    })
}

/// Runs every check for `logic` with `points` operator samples.
pub fn gradcheck(logic: LogicConfig, points: usize, seed: u64) -> Result<GradCheckReport, TrainError> {
    let rx = Relaxation::new(logic)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = Vec::with_capacity(points);
    while sample.len() < points {
        let (x, y) = (rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99));
        if !near_kink(x, y) {
            sample.push((x, y));
        }
    }
    let mut ops: Vec<(&str, Build)> = vec![
        ("and", |r, g, a, b| Ok(r.and(g, a, b))),
        ("or", |r, g, a, b| Ok(r.or(g, a, b))),
        ("leq", |r, g, a, b| Ok(r.leq(g, a, b))),
        ("lt", |r, g, a, b| Ok(r.lt(g, a, b))),
        ("eq", |r, g, a, b| Ok(r.eq(g, a, b))),
        ("neq", |r, g, a, b| Ok(r.neq(g, a, b))),
    ];
    if rx.is_fuzzy() {
        ops.push(("not", |r, g, a, _| Ok(r.not(g, a)?)));
        ops.push(("implies", |r, g, a, b| Ok(r.implies(g, a, b)?)));
    }
    let mut checks = Vec::new();
    for (name, build) in ops {
        checks.push(operator(&rx, name, build, &sample)?);
    }
    for cfg in network_constraints() {
        checks.push(network(logic, &cfg, &mut rng, 20)?);
    }
    Ok(GradCheckReport { logic, checks })
}
