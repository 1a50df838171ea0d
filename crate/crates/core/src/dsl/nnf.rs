use alloc::boxed::Box;

use super::ast::*;
use super::LowerError;

/// Flips a comparison so that it denotes the negation of the original.
pub fn negate_comparison(op: CmpOp, a: Term, b: Term) -> Formula {
    match op {
        CmpOp::Le => Formula::Compare(CmpOp::Lt, b, a),
        CmpOp::Lt => Formula::Compare(CmpOp::Le, b, a),
        CmpOp::Ge => Formula::Compare(CmpOp::Lt, a, b),
        CmpOp::Gt => Formula::Compare(CmpOp::Le, a, b),
        CmpOp::Eq => Formula::Compare(CmpOp::Ne, a, b),
        CmpOp::Ne => Formula::Compare(CmpOp::Eq, a, b),
    }
}

/// Rewrites `f` into negation normal form for comparison-atomic formulas:
/// De Morgan, `¬(a → b) ≡ a ∧ ¬b`, `¬(a ↔ b) ≡ (a ∧ ¬b) ∨ (¬a ∧ b)`, and
/// negated comparisons flipped (`¬(x ≤ y) ≡ y < x`). Implications and
/// equivalences that are not under a negation are kept.
pub fn push_negation(f: &Formula) -> Result<Formula, LowerError> {
    push(f, false)
}

fn push(f: &Formula, negated: bool) -> Result<Formula, LowerError> {
    Ok(match f {
        Formula::Prop(p) => return Err(LowerError::PropositionalVariable(p.clone())),
        Formula::Compare(op, a, b) => {
            if negated {
                negate_comparison(*op, a.clone(), b.clone())
            } else {
                f.clone()
            }
        }
        Formula::Not(a) => push(a, !negated)?,
        Formula::And(a, b) => {
            let (a, b) = (push(a, negated)?, push(b, negated)?);
            if negated {
                Formula::or(a, b)
            } else {
                Formula::and(a, b)
            }
        }
        Formula::Or(a, b) => {
            let (a, b) = (push(a, negated)?, push(b, negated)?);
            if negated {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        Formula::Implies(a, b) => {
            if negated {
                Formula::and(push(a, false)?, push(b, true)?)
            } else {
                Formula::implies(push(a, false)?, push(b, false)?)
            }
        }
        Formula::Iff(a, b) => {
            if negated {
                let left = Formula::and(push(a, false)?, push(b, true)?);
                let right = Formula::and(push(a, true)?, push(b, false)?);
                Formula::or(left, right)
            } else {
                Formula::iff(push(a, false)?, push(b, false)?)
            }
        }
        Formula::BigAnd(q) | Formula::BigOr(q) => {
            let body = Box::new(push(&q.body, negated)?);
            let q = Quantifier { vars: q.vars.clone(), domain: q.domain.clone(), body };
            match (f, negated) {
                (Formula::BigAnd(_), false) | (Formula::BigOr(_), true) => Formula::BigAnd(q),
                _ => Formula::BigOr(q),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn nnf(s: &str) -> Formula {
        push_negation(&parse(s).unwrap()).unwrap()
    }

    #[test]
    fn negated_leq_becomes_strict_swap() {
        assert_eq!(nnf("!(x0[0] <= x0[1])"), parse("x0[1] < x0[0]").unwrap());
    }

    #[test]
    fn de_morgan() {
        assert_eq!(nnf("!(x0[0] <= 1 & x0[1] <= 2)"), parse("1 < x0[0] | 2 < x0[1]").unwrap());
        assert_eq!(nnf("!(x0[0] <= 1 | x0[1] <= 2)"), parse("1 < x0[0] & 2 < x0[1]").unwrap());
    }

    #[test]
    fn double_negation() {
        assert_eq!(nnf("!!(x0[0] <= x0[1])"), parse("x0[0] <= x0[1]").unwrap());
    }

    #[test]
    fn implication_and_quantifiers() {
        assert_eq!(nnf("!(x0[0] >= 1 -> x0[1] > 2)"), parse("x0[0] >= 1 & x0[1] <= 2").unwrap());
        assert_eq!(
            nnf("!all k in [0, 1] { N(x0)[k] == 0 }"),
            parse("any k in [0, 1] { N(x0)[k] != 0 }").unwrap()
        );
        assert!(!nnf("!(x0[0] <= 1 <-> x0[1] <= 1)").has_negation());
    }

    #[test]
    fn rejects_propositional_variables() {
        assert!(matches!(push_negation(&parse("!P").unwrap()), Err(LowerError::PropositionalVariable(_))));
    }
}
