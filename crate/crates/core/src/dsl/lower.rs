//! Lowering of formulas to computation graphs under a chosen logic.
//!
//! The root of a lowered formula is its truth value: in `[0, 1]` with 1 as
//! true for fuzzy logics, in `[0, ∞)` with 0 as true for DL2. Quantifiers
//! unfold into left-folded conjunctions or disjunctions of their instances.
//!
//! DL2 has no negation operator: formulas must be passed through
//! [`push_negation`] first. Implication `a → b` becomes `¬a ∨ b` with the
//! negation pushed into `a`, and `a ↔ b` becomes `(a → b) ∧ (b → a)`.

use crate::graph::{Graph, NodeId};
use crate::relax::Relaxation;

use super::ast::*;
use super::nnf::push_negation;
use super::semantics::{instances, term_leaf, Leaf};
use super::LowerError;

/// Supplies graph nodes for leaves and propositional variables.
pub trait LeafResolver {
    fn leaf(&mut self, g: &mut Graph, leaf: &Leaf) -> Result<NodeId, LowerError>;

    fn prop(&mut self, _g: &mut Graph, name: &str) -> Result<NodeId, LowerError> {
        Err(LowerError::UnboundProp(name.into()))
    }
}

pub fn lower_term(t: &Term, g: &mut Graph, r: &mut impl LeafResolver) -> Result<NodeId, LowerError> {
    if let Some(leaf) = term_leaf(t)? {
        return r.leaf(g, &leaf);
    }
    Ok(match t {
        Term::Const(c) => g.constant(*c),
        Term::Neg(a) => {
            let a = lower_term(a, g, r)?;
            g.neg(a)
        }
        Term::Bin(op, a, b) => {
            let a = lower_term(a, g, r)?;
            let b = lower_term(b, g, r)?;
            match op {
                ArithOp::Add => g.add(a, b),
                ArithOp::Sub => g.sub(a, b),
                ArithOp::Mul => g.mul(a, b),
                ArithOp::Div => g.div(a, b),
            }
        }
        _ => unreachable!("leaf terms handled above"),
    })
}

fn compare(op: CmpOp, a: NodeId, b: NodeId, rx: &Relaxation, g: &mut Graph) -> NodeId {
    match op {
        CmpOp::Le => rx.leq(g, a, b),
        CmpOp::Lt => rx.lt(g, a, b),
        CmpOp::Ge => rx.leq(g, b, a),
        CmpOp::Gt => rx.lt(g, b, a),
        CmpOp::Eq => rx.eq(g, a, b),
        CmpOp::Ne => rx.neq(g, a, b),
    }
}

/// Lowers `f` and returns its truth node.
pub fn lower(f: &Formula, rx: &Relaxation, g: &mut Graph, r: &mut impl LeafResolver) -> Result<NodeId, LowerError> {
    Ok(match f {
        Formula::Compare(op, a, b) => {
            let a = lower_term(a, g, r)?;
            let b = lower_term(b, g, r)?;
            compare(*op, a, b, rx, g)
        }
        Formula::Prop(p) => r.prop(g, p)?,
        Formula::And(a, b) => {
            let a = lower(a, rx, g, r)?;
            let b = lower(b, rx, g, r)?;
            rx.and(g, a, b)
        }
        Formula::Or(a, b) => {
            let a = lower(a, rx, g, r)?;
            let b = lower(b, rx, g, r)?;
            rx.or(g, a, b)
        }
        Formula::Not(a) => {
            if rx.is_fuzzy() {
                let a = lower(a, rx, g, r)?;
                rx.not(g, a)?
            } else {
                return Err(LowerError::Dl2Negation);
            }
        }
        Formula::Implies(a, b) => {
            if rx.is_fuzzy() {
                let a = lower(a, rx, g, r)?;
                let b = lower(b, rx, g, r)?;
                rx.implies(g, a, b)?
            } else {
                let na = push_negation(&Formula::not((**a).clone()))?;
                let na = lower(&na, rx, g, r)?;
                let b = lower(b, rx, g, r)?;
                rx.or(g, na, b)
            }
        }
        Formula::Iff(a, b) => {
            if rx.is_fuzzy() {
                let x = lower(a, rx, g, r)?;
                let y = lower(b, rx, g, r)?;
                let fwd = rx.implies(g, x, y)?;
                let bwd = rx.implies(g, y, x)?;
                rx.and(g, fwd, bwd)
            } else {
                let fwd = Formula::implies((**a).clone(), (**b).clone());
                let bwd = Formula::implies((**b).clone(), (**a).clone());
                let fwd = lower(&fwd, rx, g, r)?;
                let bwd = lower(&bwd, rx, g, r)?;
                rx.and(g, fwd, bwd)
            }
        }
        Formula::BigAnd(q) | Formula::BigOr(q) => {
            let conj = matches!(f, Formula::BigAnd(_));
            let mut acc: Option<NodeId> = None;
            for inst in instances(q)? {
                let v = lower(&inst, rx, g, r)?;
                acc = Some(match acc {
                    None => v,
                    Some(a) if conj => rx.and(g, a, v),
                    Some(a) => rx.or(g, a, v),
                });
            }
            acc.expect("non-empty domain")
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::logic::{LogicConfig, LogicKind};
    use alloc::vec::Vec;

    /// Binds every referenced leaf to a fresh input slot.
    #[derive(Default)]
    struct Slots(Vec<(Leaf, NodeId)>);

    impl LeafResolver for Slots {
        fn leaf(&mut self, g: &mut Graph, leaf: &Leaf) -> Result<NodeId, LowerError> {
            if let Some((_, n)) = self.0.iter().find(|(l, _)| l == leaf) {
                return Ok(*n);
            }
            let n = g.input();
            self.0.push((leaf.clone(), n));
            Ok(n)
        }
    }

    fn truth(kind: LogicKind, src: &str, values: &[f64]) -> f64 {
        let rx = Relaxation::new(LogicConfig::new(kind)).unwrap();
        let mut g = Graph::new();
        let mut s = Slots::default();
        let f = push_negation(&parse(src).unwrap()).unwrap();
        let root = lower(&f, &rx, &mut g, &mut s).unwrap();
        g.eval(root, values).unwrap()
    }

    #[test]
    fn dl2_comparisons() {
        assert_eq!(truth(LogicKind::Dl2, "x0[0] <= x0[1]", &[3.0, 1.0]), 2.0);
        assert_eq!(truth(LogicKind::Dl2, "x0[0] >= x0[1]", &[3.0, 1.0]), 0.0);
        assert_eq!(truth(LogicKind::Dl2, "x0[0] < x0[1]", &[1.0, 1.0]), 1.0);
        assert_eq!(truth(LogicKind::Dl2, "x0[0] == x0[1]", &[1.0, 4.0]), 3.0);
        assert_eq!(truth(LogicKind::Dl2, "x0[0] != x0[1]", &[2.0, 2.0]), 1.0);
    }

    #[test]
    fn dl2_connectives() {
        // and = +, or = ×
        assert_eq!(truth(LogicKind::Dl2, "x0[0] <= 0 & x0[1] <= 0", &[1.0, 2.0]), 3.0);
        assert_eq!(truth(LogicKind::Dl2, "x0[0] <= 0 | x0[1] <= 0", &[1.0, 2.0]), 2.0);
        // ¬(x ≤ 0) → y ≤ 0  ==  (x ≤ 0) ∨ (y ≤ 0)
        assert_eq!(truth(LogicKind::Dl2, "!(x0[0] <= 0) -> x0[1] <= 0", &[1.0, 2.0]), 2.0);
        // x ≥ 1 → y ≥ 1 lowers to (x < 1) ∨ (y ≥ 1)
        let v = truth(LogicKind::Dl2, "x0[0] >= 1 -> x0[1] >= 1", &[3.0, 0.5]);
        assert_eq!(v, (2.0 + 0.0) * 0.5);
    }

    #[test]
    fn dl2_rejects_negation_and_props() {
        let rx = Relaxation::new(LogicConfig::new(LogicKind::Dl2)).unwrap();
        let mut g = Graph::new();
        let err = lower(&parse("!(x0[0] <= 1)").unwrap(), &rx, &mut g, &mut Slots::default()).unwrap_err();
        assert_eq!(err, LowerError::Dl2Negation);
        let err = lower(&parse("P -> Q").unwrap(), &rx, &mut g, &mut Slots::default()).unwrap_err();
        assert_eq!(err, LowerError::PropositionalVariable("P".into()));
    }

    #[test]
    fn fuzzy_comparisons() {
        assert_eq!(truth(LogicKind::Godel, "x0[0] <= x0[1]", &[0.2, 0.4]), 1.0);
        let v = truth(LogicKind::Godel, "x0[0] <= x0[1]", &[0.6, 0.2]);
        assert!((v - (1.0 - 0.4 / 0.8)).abs() < 1e-12);
        let v = truth(LogicKind::Reichenbach, "x0[0] == x0[1]", &[0.6, 0.2]);
        assert!((v - 0.5).abs() < 1e-12);
        let v = truth(LogicKind::Reichenbach, "x0[0] != x0[1]", &[0.6, 0.2]);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quantifiers_fold_to_instances() {
        let a = truth(LogicKind::Lukasiewicz, "all k in [0, 1] { N(xadv)[k] <= 0.5 }", &[0.6, 0.9]);
        let b = truth(LogicKind::Lukasiewicz, "N(xadv)[0] <= 0.5 & N(xadv)[1] <= 0.5", &[0.6, 0.9]);
        assert_eq!(a, b);
    }

    struct Props<'a>(&'a [(&'a str, f64)]);

    impl LeafResolver for Props<'_> {
        fn leaf(&mut self, _: &mut Graph, leaf: &Leaf) -> Result<NodeId, LowerError> {
            Err(LowerError::Unbound(leaf.clone()))
        }

        fn prop(&mut self, g: &mut Graph, name: &str) -> Result<NodeId, LowerError> {
            let v = self.0.iter().find(|(n, _)| *n == name).unwrap().1;
            Ok(g.constant(v))
        }
    }

    #[test]
    fn propositional_formulas_match_scalar_operators() {
        let cfg = LogicConfig::new(LogicKind::Goguen);
        let ops = cfg.operators().unwrap();
        let rx = Relaxation::new(cfg).unwrap();
        let (p, q) = (0.7, 0.3);
        let mut g = Graph::new();
        let root = lower(&parse("(P -> Q) <-> !P | Q").unwrap(), &rx, &mut g, &mut Props(&[("P", p), ("Q", q)])).unwrap();
        let want = ops.equivalence(ops.implication(p, q), ops.snorm(ops.negation(p), q));
        assert!((g.eval(root, &[]).unwrap() - want).abs() < 1e-12);
    }
}
