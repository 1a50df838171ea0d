//! Signed violation margins: positive exactly where a comparison-atomic
//! formula in negation normal form is violated.
//!
//! `a ≤ b` maps to `a − b`, `a == b` to `|a − b|`, `a != b` to `−|a − b|`;
//! conjunction takes the larger margin and disjunction the smaller one.
//! Unlike the relaxations, the margin has a non-zero gradient on both sides
//! of every comparison, which makes it a usable search direction where a
//! relaxed loss is flat.

use crate::graph::{Graph, NodeId};

use super::ast::*;
use super::lower::{lower_term, LeafResolver};
use super::nnf::push_negation;
use super::semantics::instances;
use super::LowerError;

fn compare(op: CmpOp, a: NodeId, b: NodeId, g: &mut Graph) -> NodeId {
    match op {
        CmpOp::Le | CmpOp::Lt => g.sub(a, b),
        CmpOp::Ge | CmpOp::Gt => g.sub(b, a),
        CmpOp::Eq => {
            let d = g.sub(a, b);
            g.abs(d)
        }
        CmpOp::Ne => {
            let d = g.sub(a, b);
            let d = g.abs(d);
            g.neg(d)
        }
    }
}

/// Lowers `f` to its margin node. Negations are pushed inward first.
pub fn lower_margin(f: &Formula, g: &mut Graph, r: &mut impl LeafResolver) -> Result<NodeId, LowerError> {
    let f = push_negation(f)?;
    margin(&f, g, r)
}

fn margin(f: &Formula, g: &mut Graph, r: &mut impl LeafResolver) -> Result<NodeId, LowerError> {
    Ok(match f {
        Formula::Compare(op, a, b) => {
            let a = lower_term(a, g, r)?;
            let b = lower_term(b, g, r)?;
            compare(*op, a, b, g)
        }
        Formula::Prop(p) => return Err(LowerError::PropositionalVariable(p.clone())),
        Formula::Not(_) => unreachable!("negations are pushed to comparisons"),
        Formula::And(a, b) => {
            let (a, b) = (margin(a, g, r)?, margin(b, g, r)?);
            g.max(a, b)
        }
        Formula::Or(a, b) => {
            let (a, b) = (margin(a, g, r)?, margin(b, g, r)?);
            g.min(a, b)
        }
        Formula::Implies(a, b) => {
            let na = push_negation(&Formula::not((**a).clone()))?;
            let (na, b) = (margin(&na, g, r)?, margin(b, g, r)?);
            g.min(na, b)
        }
        Formula::Iff(a, b) => {
            let fwd = margin(&Formula::implies((**a).clone(), (**b).clone()), g, r)?;
            let bwd = margin(&Formula::implies((**b).clone(), (**a).clone()), g, r)?;
            g.max(fwd, bwd)
        }
        Formula::BigAnd(q) | Formula::BigOr(q) => {
            let conj = matches!(f, Formula::BigAnd(_));
            let mut acc: Option<NodeId> = None;
            for inst in instances(q)? {
                let v = margin(&inst, g, r)?;
                acc = Some(match acc {
                    None => v,
                    Some(a) if conj => g.max(a, v),
                    Some(a) => g.min(a, v),
                });
            }
            acc.expect("non-empty domain")
        }
    })
}
