//! Quantifier expansion and exact two-valued evaluation.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::*;
use super::LowerError;

/// A resolved leaf of a term: everything a valuation or graph binding has
/// to supply.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leaf {
    Input(Which, usize),
    NetOut(Which, usize),
    Group(Which, String),
    InfNormDiff,
}

/// Values for leaves and propositional variables.
pub trait Valuation {
    fn leaf(&self, leaf: &Leaf) -> Option<f64>;

    fn prop(&self, _name: &str) -> Option<bool> {
        None
    }
}

/// Replaces quantifier variables by the values of one domain tuple.
pub fn substitute(f: &Formula, vars: &[String], values: &[IndexValue]) -> Result<Formula, LowerError> {
    let lookup = |v: &str| vars.iter().position(|x| x == v).map(|i| &values[i]);
    Ok(match f {
        Formula::Compare(op, a, b) => {
            Formula::Compare(*op, substitute_term(a, &lookup)?, substitute_term(b, &lookup)?)
        }
        Formula::Prop(_) => f.clone(),
        Formula::Not(a) => Formula::not(substitute(a, vars, values)?),
        Formula::And(a, b) => Formula::and(substitute(a, vars, values)?, substitute(b, vars, values)?),
        Formula::Or(a, b) => Formula::or(substitute(a, vars, values)?, substitute(b, vars, values)?),
        Formula::Implies(a, b) => Formula::implies(substitute(a, vars, values)?, substitute(b, vars, values)?),
        Formula::Iff(a, b) => Formula::iff(substitute(a, vars, values)?, substitute(b, vars, values)?),
        Formula::BigAnd(q) | Formula::BigOr(q) => {
            // inner bindings shadow outer ones
            let (outer_vars, outer_values): (Vec<String>, Vec<IndexValue>) = vars
                .iter()
                .zip(values)
                .filter(|(v, _)| !q.vars.contains(v))
                .map(|(v, x)| (v.clone(), x.clone()))
                .unzip();
            let body = Box::new(substitute(&q.body, &outer_vars, &outer_values)?);
            let q = Quantifier { vars: q.vars.clone(), domain: q.domain.clone(), body };
            if matches!(f, Formula::BigAnd(_)) {
                Formula::BigAnd(q)
            } else {
                Formula::BigOr(q)
            }
        }
    })
}

fn substitute_term<'a>(t: &Term, lookup: &impl Fn(&str) -> Option<&'a IndexValue>) -> Result<Term, LowerError> {
    let index = |i: &Index| -> Result<Index, LowerError> {
        match i {
            Index::Var(v) => match lookup(v) {
                Some(IndexValue::Int(k)) => Ok(Index::Lit(*k)),
                Some(IndexValue::Name(n)) => Err(LowerError::BindingType { var: v.clone(), value: n.clone() }),
                None => Ok(i.clone()),
            },
            Index::Lit(_) => Ok(i.clone()),
        }
    };
    Ok(match t {
        Term::Const(_) | Term::InfNormDiff => t.clone(),
        Term::Input(w, i) => Term::Input(*w, index(i)?),
        Term::NetOut(w, i) => Term::NetOut(*w, index(i)?),
        Term::GroupProb(w, GroupRef::Var(v)) => match lookup(v) {
            Some(IndexValue::Name(n)) => Term::GroupProb(*w, GroupRef::Name(n.clone())),
            Some(IndexValue::Int(k)) => {
                return Err(LowerError::BindingType { var: v.clone(), value: alloc::format!("{k}") })
            }
            None => t.clone(),
        },
        Term::GroupProb(..) => t.clone(),
        Term::Neg(a) => Term::Neg(Box::new(substitute_term(a, lookup)?)),
        Term::Bin(op, a, b) => Term::Bin(*op, Box::new(substitute_term(a, lookup)?), Box::new(substitute_term(b, lookup)?)),
    })
}

/// Instances of a quantifier body, one per domain tuple, in domain order.
pub fn instances(q: &Quantifier) -> Result<Vec<Formula>, LowerError> {
    if q.domain.is_empty() {
        return Err(LowerError::EmptyDomain);
    }
    q.domain.iter().map(|t| substitute(&q.body, &q.vars, t)).collect()
}

/// Removes all finite quantifiers by unfolding them left to right.
pub fn expand(f: &Formula) -> Result<Formula, LowerError> {
    Ok(match f {
        Formula::Compare(..) | Formula::Prop(_) => f.clone(),
        Formula::Not(a) => Formula::not(expand(a)?),
        Formula::And(a, b) => Formula::and(expand(a)?, expand(b)?),
        Formula::Or(a, b) => Formula::or(expand(a)?, expand(b)?),
        Formula::Implies(a, b) => Formula::implies(expand(a)?, expand(b)?),
        Formula::Iff(a, b) => Formula::iff(expand(a)?, expand(b)?),
        Formula::BigAnd(q) | Formula::BigOr(q) => {
            let conj = matches!(f, Formula::BigAnd(_));
            let mut parts = instances(q)?.into_iter();
            let mut acc = expand(&parts.next().expect("non-empty domain"))?;
            for p in parts {
                let p = expand(&p)?;
                acc = if conj { Formula::and(acc, p) } else { Formula::or(acc, p) };
            }
            acc
        }
    })
}

pub fn term_leaf(t: &Term) -> Result<Option<Leaf>, LowerError> {
    let lit = |i: &Index| match i {
        Index::Lit(k) => Ok(*k),
        Index::Var(v) => Err(LowerError::UnboundVariable(v.clone())),
    };
    Ok(match t {
        Term::Input(w, i) => Some(Leaf::Input(*w, lit(i)?)),
        Term::NetOut(w, i) => Some(Leaf::NetOut(*w, lit(i)?)),
        Term::GroupProb(w, GroupRef::Name(n)) => Some(Leaf::Group(*w, n.clone())),
        Term::GroupProb(_, GroupRef::Var(v)) => return Err(LowerError::UnboundVariable(v.clone())),
        Term::InfNormDiff => Some(Leaf::InfNormDiff),
        _ => None,
    })
}

pub fn eval_term(t: &Term, v: &impl Valuation) -> Result<f64, LowerError> {
    if let Some(leaf) = term_leaf(t)? {
        return v.leaf(&leaf).ok_or(LowerError::Unbound(leaf));
    }
    Ok(match t {
        Term::Const(c) => *c,
        Term::Neg(a) => -eval_term(a, v)?,
        Term::Bin(op, a, b) => {
            let (x, y) = (eval_term(a, v)?, eval_term(b, v)?);
            match op {
                ArithOp::Add => x + y,
                ArithOp::Sub => x - y,
                ArithOp::Mul => x * y,
                ArithOp::Div => x / y,
            }
        }
        _ => unreachable!("leaf terms handled above"),
    })
}

/// Exact classical truth of a formula.
pub fn holds(f: &Formula, v: &impl Valuation) -> Result<bool, LowerError> {
    Ok(match f {
        Formula::Compare(op, a, b) => op.holds(eval_term(a, v)?, eval_term(b, v)?),
        Formula::Prop(p) => v.prop(p).ok_or_else(|| LowerError::UnboundProp(p.clone()))?,
        Formula::Not(a) => !holds(a, v)?,
        Formula::And(a, b) => holds(a, v)? & holds(b, v)?,
        Formula::Or(a, b) => holds(a, v)? | holds(b, v)?,
        Formula::Implies(a, b) => !holds(a, v)? | holds(b, v)?,
        Formula::Iff(a, b) => holds(a, v)? == holds(b, v)?,
        Formula::BigAnd(q) => {
            let mut all = true;
            for inst in instances(q)? {
                all &= holds(&inst, v)?;
            }
            all
        }
        Formula::BigOr(q) => {
            let mut any = false;
            for inst in instances(q)? {
                any |= holds(&inst, v)?;
            }
            any
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    struct Probs(Vec<f64>);

    impl Valuation for Probs {
        fn leaf(&self, leaf: &Leaf) -> Option<f64> {
            match leaf {
                Leaf::NetOut(Which::Xadv, k) => self.0.get(*k).copied(),
                _ => None,
            }
        }
    }

    #[test]
    fn expansion_folds_left() {
        let f = parse("all k in [0, 1, 2] { N(xadv)[k] <= 0.5 }").unwrap();
        let e = expand(&f).unwrap();
        assert_eq!(e, parse("N(xadv)[0] <= 0.5 & N(xadv)[1] <= 0.5 & N(xadv)[2] <= 0.5").unwrap());
    }

    #[test]
    fn nested_quantifiers_shadow() {
        let f = parse("all k in [0] { any k in [1, 2] { N(xadv)[k] >= 0.2 } }").unwrap();
        let e = expand(&f).unwrap();
        assert_eq!(e, parse("N(xadv)[1] >= 0.2 | N(xadv)[2] >= 0.2").unwrap());
    }

    #[test]
    fn binding_kinds_are_checked() {
        let f = parse("all k in [animals] { N(xadv)[k] <= 0.5 }").unwrap();
        assert!(matches!(expand(&f), Err(LowerError::BindingType { .. })));
        let f = parse("all g in [1] { group(g) <= 0.5 }").unwrap();
        assert!(matches!(expand(&f), Err(LowerError::BindingType { .. })));
    }

    #[test]
    fn classical_evaluation() {
        let v = Probs(alloc::vec![0.2, 0.5, 0.3]);
        let f = parse("all (a, b, c) in [(0, 1, 2)] { N(xadv)[a] >= 1/3 -> N(xadv)[b] >= N(xadv)[c] }").unwrap();
        assert!(holds(&f, &v).unwrap());
        let f = parse("N(xadv)[0] + N(xadv)[1] + N(xadv)[2] == 1").unwrap();
        assert!(holds(&f, &v).unwrap());
        let f = parse("N(x0)[0] <= 1").unwrap();
        assert!(matches!(holds(&f, &v), Err(LowerError::Unbound(Leaf::NetOut(Which::X0, 0)))));
    }
}
