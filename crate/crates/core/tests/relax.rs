use dlc_core::graph::{Graph, NodeId};
use dlc_core::logic::{self, LogicConfig, LogicKind};
use dlc_core::relax::{self, Relaxation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Build = fn(&Relaxation, &mut Graph, NodeId, NodeId) -> NodeId;

fn near_kink(x: f64, y: f64) -> bool {
    let d = 2e-3;
    (x - y).abs() < d
        || (x + y - 1.0).abs() < d
        || ((1.0 - x).powi(2) + (1.0 - y).powi(2) - 1.0).abs() < d
        || (x * x + y * y - 1.0).abs() < d
}

fn points(seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < 200 {
        let (x, y) = (rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99));
        if !near_kink(x, y) {
            out.push((x, y));
        }
    }
    out
}

fn check(kind: LogicKind, build: Build, scalar: &dyn Fn(f64, f64) -> f64) {
    let rx = Relaxation::new(LogicConfig::new(kind)).unwrap();
    let mut g = Graph::new();
    let (a, b) = (g.input(), g.input());
    let root = build(&rx, &mut g, a, b);
    for (x, y) in points(7) {
        let v = g.eval(root, &[x, y]).unwrap();
        assert!((v - scalar(x, y)).abs() < 1e-12, "{kind:?} value at ({x}, {y}): {v} vs {}", scalar(x, y));
        let grad = g.backward(root);
        let fd = g.finite_diff(root, &[x, y], 1e-6).unwrap();
        for i in 0..2 {
            assert!((grad[i] - fd[i]).abs() < 1e-5, "{kind:?} d{i} at ({x}, {y}): {} vs {}", grad[i], fd[i]);
        }
    }
}

#[test]
fn connectives_match_scalar_operators_and_finite_differences() {
    for kind in LogicKind::FUZZY {
        let ops = LogicConfig::new(kind).operators().unwrap();
        check(kind, |r, g, a, b| r.and(g, a, b), &|x, y| ops.tnorm(x, y));
        check(kind, |r, g, a, b| r.or(g, a, b), &|x, y| ops.snorm(x, y));
        check(kind, |r, g, a, b| r.implies(g, a, b).unwrap(), &|x, y| ops.implication(x, y));
        check(kind, |r, g, a, _| r.not(g, a).unwrap(), &|x, _| ops.negation(x));
        check(kind, |r, g, a, b| r.leq(g, a, b), &logic::fuzzy_leq);
    }
}

#[test]
fn dl2_matches_scalar_operators() {
    check(LogicKind::Dl2, |r, g, a, b| r.and(g, a, b), &|x, y| x + y);
    check(LogicKind::Dl2, |r, g, a, b| r.or(g, a, b), &|x, y| x * y);
    check(LogicKind::Dl2, |r, g, a, b| r.leq(g, a, b), &logic::dl2_leq);
    check(LogicKind::Dl2, |r, g, a, b| r.neq(g, a, b), &|x, y| logic::dl2_neq(x, y, 1.0));
}

#[test]
fn dl2_has_no_negation_or_implication_node() {
    let rx = Relaxation::new(LogicConfig::new(LogicKind::Dl2)).unwrap();
    let mut g = Graph::new();
    let a = g.input();
    assert!(rx.not(&mut g, a).is_err());
    assert!(rx.implies(&mut g, a, a).is_err());
}

#[test]
fn piecewise_implications_are_finite_at_zero() {
    for kind in [LogicKind::Goguen, LogicKind::Yager, LogicKind::Godel] {
        let ops = LogicConfig::new(kind).operators().unwrap();
        let mut g = Graph::new();
        let (a, b) = (g.input(), g.input());
        let root = relax::implication(&mut g, ops.implication, a, b);
        for (x, y) in [(0.0, 0.0), (0.0, 0.5), (0.5, 0.0), (1.0, 1.0)] {
            let v = g.eval(root, &[x, y]).unwrap();
            assert_eq!(v, ops.implication(x, y), "{kind:?} ({x}, {y})");
            assert!(g.backward(root).iter().all(|d| d.is_finite()));
        }
    }
}

#[test]
fn sigmoidal_reichenbach_gradient_scales_reichenbach() {
    // d/dI of the transform at I: s·(1+e^{s/2})·σ'(sI − s/2)/(e^{s/2} − 1)
    let s = 9.0;
    let (x, y) = (0.7, 0.2);
    let inner = 1.0 - x + x * y;
    let sig = logic::sigmoid(s * inner - s / 2.0);
    let k = s * (1.0 + (s / 2.0f64).exp()) * sig * (1.0 - sig) / ((s / 2.0f64).exp() - 1.0);
    let mut g = Graph::new();
    let (a, b) = (g.input(), g.input());
    let root = relax::implication(&mut g, logic::Implication::SigmoidalReichenbach { s }, a, b);
    g.eval(root, &[x, y]).unwrap();
    let grad = g.backward(root);
    assert!((grad[0] - k * (y - 1.0)).abs() < 1e-12);
    assert!((grad[1] - k * x).abs() < 1e-12);
}
