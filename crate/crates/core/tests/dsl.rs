use dlc_core::dsl::{self, CmpOp, Formula, Index, Leaf, LeafResolver, LowerError, Term, Valuation, Which};
use dlc_core::graph::{Graph, NodeId};
use dlc_core::logic::{LogicConfig, LogicKind};
use dlc_core::relax::Relaxation;
use proptest::prelude::*;

const VARS: usize = 4;

struct Inputs<'a>(&'a [f64]);

impl Valuation for Inputs<'_> {
    fn leaf(&self, leaf: &Leaf) -> Option<f64> {
        match leaf {
            Leaf::Input(Which::X0, i) => self.0.get(*i).copied(),
            _ => None,
        }
    }
}

/// Binds `x0[i]` to input slot `i`.
struct Slots(Vec<Option<NodeId>>);

impl LeafResolver for Slots {
    fn leaf(&mut self, g: &mut Graph, leaf: &Leaf) -> Result<NodeId, LowerError> {
        match leaf {
            Leaf::Input(Which::X0, i) if *i < VARS => {
                while self.0.len() <= *i {
                    self.0.push(None);
                }
                Ok(*self.0[*i].get_or_insert_with(|| g.input()))
            }
            _ => Err(LowerError::Unbound(leaf.clone())),
        }
    }
}

fn x(i: usize) -> Term {
    Term::Input(Which::X0, Index::Lit(i))
}

/// Comparisons against 0 that are fully true at `x = 0` and fully false at
/// `x = 1` (or the reverse for `!=`) under every logic.
fn atom() -> impl Strategy<Value = Formula> {
    (0..VARS, 0..4usize).prop_map(|(i, k)| match k {
        0 => Formula::compare(CmpOp::Le, x(i), Term::Const(0.0)),
        1 => Formula::compare(CmpOp::Ge, Term::Const(0.0), x(i)),
        2 => Formula::compare(CmpOp::Eq, x(i), Term::Const(0.0)),
        _ => Formula::compare(CmpOp::Ne, x(i), Term::Const(0.0)),
    })
}

fn formula(leaf: impl Strategy<Value = Formula> + 'static) -> impl Strategy<Value = Formula> {
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
        ]
    })
}

/// Comparisons between arbitrary input terms and constants.
fn real_atom() -> impl Strategy<Value = Formula> {
    let term = prop_oneof![(0..VARS).prop_map(x), (-2i32..3).prop_map(|c| Term::Const(c as f64 / 2.0))];
    let op = prop_oneof![
        Just(CmpOp::Le),
        Just(CmpOp::Lt),
        Just(CmpOp::Ge),
        Just(CmpOp::Gt),
        Just(CmpOp::Eq),
        Just(CmpOp::Ne)
    ];
    (op, term.clone(), term).prop_map(|(op, a, b)| Formula::compare(op, a, b))
}

fn lower_eval(f: &Formula, kind: LogicKind, values: &[f64]) -> f64 {
    let rx = Relaxation::new(LogicConfig::new(kind)).unwrap();
    let f = if rx.is_fuzzy() { f.clone() } else { dsl::push_negation(f).unwrap() };
    let mut g = Graph::new();
    let mut slots = Slots(Vec::new());
    let root = dsl::lower(&f, &rx, &mut g, &mut slots).unwrap();
    // slots are created in first-use order; map them back to variables
    let mut inputs = vec![0.0; g.input_count()];
    for (i, n) in slots.0.iter().enumerate() {
        if let Some(n) = n {
            if let dlc_core::graph::Op::Input(slot) = g.op(*n) {
                inputs[slot] = values[i];
            }
        }
    }
    g.eval(root, &inputs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn push_negation_preserves_classical_semantics(
        f in formula(real_atom()),
        values in prop::collection::vec(-1.0..1.0f64, VARS),
    ) {
        // snap some inputs onto the constants so equality atoms are exercised
        let values: Vec<f64> = values.iter().map(|v| if v.abs() < 0.3 { (v * 2.0).round() / 2.0 } else { *v }).collect();
        let n = dsl::push_negation(&f).unwrap();
        prop_assert!(!n.has_negation());
        prop_assert_eq!(dsl::holds(&f, &Inputs(&values)).unwrap(), dsl::holds(&n, &Inputs(&values)).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lowering_agrees_with_two_valued_semantics(
        f in formula(atom()),
        bits in prop::collection::vec(any::<bool>(), VARS),
    ) {
        let values: Vec<f64> = bits.iter().map(|b| if *b { 1.0 } else { 0.0 }).collect();
        let truth = dsl::holds(&f, &Inputs(&values)).unwrap();
        let has_implication = {
            let mut found = false;
            f.visit(&mut |g| found |= matches!(g, Formula::Implies(..) | Formula::Iff(..)));
            found
        };
        for kind in LogicKind::ALL {
            // the strict Gödel implication gives false -> false = 0
            if kind == LogicKind::Godel && has_implication {
                continue;
            }
            let v = lower_eval(&f, kind, &values);
            if kind.is_fuzzy() {
                prop_assert!((v - if truth { 1.0 } else { 0.0 }).abs() < 1e-9, "{:?} {} gave {}", kind, f, v);
            } else {
                prop_assert_eq!(v == 0.0, truth, "DL2 {} gave {}", f, v);
                prop_assert!(v >= 0.0);
            }
        }
    }

    #[test]
    fn lowering_is_compositional(
        a in formula(atom()),
        b in formula(atom()),
        values in prop::collection::vec(0.0..1.0f64, VARS),
    ) {
        for kind in LogicKind::FUZZY {
            let ops = LogicConfig::new(kind).operators().unwrap();
            let (va, vb) = (lower_eval(&a, kind, &values), lower_eval(&b, kind, &values));
            let whole = [
                (Formula::and(a.clone(), b.clone()), ops.tnorm(va, vb)),
                (Formula::or(a.clone(), b.clone()), ops.snorm(va, vb)),
                (Formula::implies(a.clone(), b.clone()), ops.implication(va, vb)),
                (Formula::iff(a.clone(), b.clone()), ops.equivalence(va, vb)),
                (Formula::not(a.clone()), ops.negation(va)),
            ];
            for (f, want) in whole {
                let got = lower_eval(&f, kind, &values);
                prop_assert!((got - want).abs() < 1e-12, "{:?} {}: {} vs {}", kind, f, got, want);
            }
        }
        let (va, vb) = (lower_eval(&a, LogicKind::Dl2, &values), lower_eval(&b, LogicKind::Dl2, &values));
        prop_assert!((lower_eval(&Formula::and(a.clone(), b.clone()), LogicKind::Dl2, &values) - (va + vb)).abs() < 1e-12);
        prop_assert!((lower_eval(&Formula::or(a, b), LogicKind::Dl2, &values) - va * vb).abs() < 1e-12);
    }
}

#[test]
fn documented_lowering_examples() {
    let f = dsl::parse("x0[0] <= x0[1] & x0[2] <= x0[3]").unwrap();
    assert_eq!(lower_eval(&f, LogicKind::Dl2, &[0.0, 1.0, 2.0, 2.0]), 0.0);

    let f = dsl::parse("P | Q").unwrap();
    let rx = Relaxation::new(LogicConfig::new(LogicKind::Godel)).unwrap();
    struct Props;
    impl LeafResolver for Props {
        fn leaf(&mut self, _: &mut Graph, leaf: &Leaf) -> Result<NodeId, LowerError> {
            Err(LowerError::Unbound(leaf.clone()))
        }
        fn prop(&mut self, g: &mut Graph, name: &str) -> Result<NodeId, LowerError> {
            Ok(g.constant(if name == "P" { 0.2 } else { 0.9 }))
        }
    }
    let mut g = Graph::new();
    let root = dsl::lower(&f, &rx, &mut g, &mut Props).unwrap();
    assert_eq!(g.eval(root, &[]).unwrap(), 0.9);

    // DL2 implication a -> b is [[!a]] * [[b]]
    let f = dsl::parse("x0[0] <= 0.5 -> x0[1] >= 0.5").unwrap();
    let got = lower_eval(&f, LogicKind::Dl2, &[0.25, 0.0, 0.0, 0.0]);
    // !a = 0.5 < x0[0]: max(0.5 - 0.25, 0) + 0 ; b = max(0.5 - 0, 0)
    assert_eq!(got, 0.25 * 0.5);
}

#[test]
fn strict_godel_implication_is_false_on_false_premise_and_conclusion() {
    let f = dsl::parse("x0[0] <= 0 -> x0[1] <= 0").unwrap();
    assert_eq!(lower_eval(&f, LogicKind::Godel, &[1.0, 1.0, 0.0, 0.0]), 0.0);
    assert_eq!(lower_eval(&f, LogicKind::Godel, &[0.0, 1.0, 0.0, 0.0]), 0.0);
    assert_eq!(lower_eval(&f, LogicKind::Godel, &[1.0, 0.0, 0.0, 0.0]), 1.0);
}

#[test]
fn parse_errors_carry_positions() {
    let e = dsl::parse("P &\n  & Q").unwrap_err();
    assert_eq!((e.line, e.column), (2, 3));
    assert!(dsl::parse("N(x1)[0] <= 1").is_err());
    assert!(matches!(dsl::parse("foo(1) <= 2").unwrap_err().kind, dsl::ParseErrorKind::UnknownIdentifier(_)));
}
