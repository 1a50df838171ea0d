//! Graph builders for the logic operators, one node pattern per operator.
//!
//! Every builder here computes exactly the same forward value as its scalar
//! counterpart in [`crate::logic`].

use crate::graph::{Cmp, Graph, NodeId};
use crate::logic::{FuzzyOperatorSet, Implication, LogicConfig, LogicError, TNorm};

/// Lowers connectives for one logic into graph nodes.
#[derive(Debug, Clone, Copy)]
pub struct Relaxation {
    pub logic: LogicConfig,
    ops: Option<FuzzyOperatorSet>,
}

impl Relaxation {
    pub fn new(logic: LogicConfig) -> Result<Self, LogicError> {
        logic.validate()?;
        let ops = if logic.is_fuzzy() { Some(logic.operators()?) } else { None };
        Ok(Relaxation { logic, ops })
    }

    pub fn is_fuzzy(&self) -> bool {
        self.ops.is_some()
    }

    pub fn operators(&self) -> Option<&FuzzyOperatorSet> {
        self.ops.as_ref()
    }

    /// DL2 conjunction is `+`; fuzzy conjunction is the t-norm.
    pub fn and(&self, g: &mut Graph, a: NodeId, b: NodeId) -> NodeId {
        match &self.ops {
            None => g.add(a, b),
            Some(ops) => tnorm(g, ops.tnorm, a, b),
        }
    }

    /// DL2 disjunction is `×`; fuzzy disjunction is the dual t-conorm.
    pub fn or(&self, g: &mut Graph, a: NodeId, b: NodeId) -> NodeId {
        match &self.ops {
            None => g.mul(a, b),
            Some(ops) => snorm(g, ops.tnorm, a, b),
        }
    }

    /// Standard negation. DL2 has none; callers push negation into
    /// comparisons first.
    pub fn not(&self, g: &mut Graph, a: NodeId) -> Result<NodeId, LogicError> {
        match &self.ops {
            None => Err(LogicError::NotFuzzy),
            Some(_) => Ok(g.one_minus(a)),
        }
    }

    /// Fuzzy implication. DL2 implication needs the negated antecedent and
    /// is built by the formula lowering instead.
    pub fn implies(&self, g: &mut Graph, a: NodeId, b: NodeId) -> Result<NodeId, LogicError> {
        match &self.ops {
            None => Err(LogicError::NotFuzzy),
            Some(ops) => Ok(implication(g, ops.implication, a, b)),
        }
    }

    /// `x ≤ y`.
    pub fn leq(&self, g: &mut Graph, x: NodeId, y: NodeId) -> NodeId {
        if self.is_fuzzy() {
            fuzzy_leq(g, x, y)
        } else {
            dl2_leq(g, x, y)
        }
    }

    /// `x < y`. DL2 adds the `≠` penalty; fuzzy logics reuse `≤` since the
    /// fuzzy comparison is already fully satisfied at equality.
    pub fn lt(&self, g: &mut Graph, x: NodeId, y: NodeId) -> NodeId {
        let le = self.leq(g, x, y);
        if self.is_fuzzy() {
            le
        } else {
            let ne = self.neq(g, x, y);
            g.add(le, ne)
        }
    }

    /// `x = y` as `x ≤ y ∧ y ≤ x`.
    pub fn eq(&self, g: &mut Graph, x: NodeId, y: NodeId) -> NodeId {
        let a = self.leq(g, x, y);
        let b = self.leq(g, y, x);
        self.and(g, a, b)
    }

    /// DL2 `ξ[x = y]`; fuzzy logics negate [`Relaxation::eq`].
    pub fn neq(&self, g: &mut Graph, x: NodeId, y: NodeId) -> NodeId {
        if self.is_fuzzy() {
            let e = self.eq(g, x, y);
            g.one_minus(e)
        } else {
            let ind = g.indicator_eq(x, y);
            let xi = g.constant(self.logic.xi);
            g.mul(xi, ind)
        }
    }

    /// Loss node for a truth node.
    pub fn loss(&self, g: &mut Graph, truth: NodeId) -> NodeId {
        if self.is_fuzzy() {
            g.one_minus(truth)
        } else {
            truth
        }
    }
}

pub fn tnorm(g: &mut Graph, t: TNorm, a: NodeId, b: NodeId) -> NodeId {
    match t {
        TNorm::Minimum => g.min(a, b),
        TNorm::Lukasiewicz => {
            let s = g.add(a, b);
            let one = g.constant(1.0);
            let d = g.sub(s, one);
            let zero = g.constant(0.0);
            g.max(d, zero)
        }
        TNorm::Product => g.mul(a, b),
        TNorm::Yager { p } => {
            let pn = g.constant(p);
            let na = g.one_minus(a);
            let nb = g.one_minus(b);
            let pa = g.pow(na, pn);
            let pb = g.pow(nb, pn);
            let s = g.add(pa, pb);
            let inv = g.constant(1.0 / p);
            let root = g.pow(s, inv);
            let v = g.one_minus(root);
            let zero = g.constant(0.0);
            g.max(v, zero)
        }
    }
}

pub fn snorm(g: &mut Graph, t: TNorm, a: NodeId, b: NodeId) -> NodeId {
    match t {
        TNorm::Minimum => g.max(a, b),
        TNorm::Lukasiewicz => {
            let s = g.add(a, b);
            let one = g.constant(1.0);
            g.min(s, one)
        }
        TNorm::Product => {
            let s = g.add(a, b);
            let m = g.mul(a, b);
            g.sub(s, m)
        }
        TNorm::Yager { p } => {
            let pn = g.constant(p);
            let pa = g.pow(a, pn);
            let pb = g.pow(b, pn);
            let s = g.add(pa, pb);
            let inv = g.constant(1.0 / p);
            let root = g.pow(s, inv);
            let one = g.constant(1.0);
            g.min(root, one)
        }
    }
}

fn reichenbach(g: &mut Graph, a: NodeId, b: NodeId) -> NodeId {
    let na = g.one_minus(a);
    let ab = g.mul(a, b);
    g.add(na, ab)
}

pub fn implication(g: &mut Graph, i: Implication, a: NodeId, b: NodeId) -> NodeId {
    match i {
        Implication::Godel => {
            let one = g.constant(1.0);
            g.select(Cmp::Lt, a, b, one, b)
        }
        Implication::KleeneDienes => {
            let na = g.one_minus(a);
            g.max(na, b)
        }
        Implication::Lukasiewicz => {
            let na = g.one_minus(a);
            let s = g.add(na, b);
            let one = g.constant(1.0);
            g.min(s, one)
        }
        Implication::Reichenbach => reichenbach(g, a, b),
        Implication::SigmoidalReichenbach { s } => {
            let inner = reichenbach(g, a, b);
            sigmoidal(g, inner, s)
        }
        Implication::Goguen => {
            // a ≤ b covers a = 0; the guarded divisor keeps the unused
            // branch finite there.
            let one = g.constant(1.0);
            let divisor = g.select(Cmp::Le, a, b, one, a);
            let q = g.div(b, divisor);
            g.select(Cmp::Le, a, b, one, q)
        }
        Implication::Yager => {
            let pw = g.pow(b, a);
            let sum = g.add(a, b);
            let zero = g.constant(0.0);
            let one = g.constant(1.0);
            g.select(Cmp::Le, sum, zero, one, pw)
        }
    }
}

/// Graph form of [`crate::logic::sigmoidal_transform`].
pub fn sigmoidal(g: &mut Graph, inner: NodeId, s: f64) -> NodeId {
    let e = libm::exp(s / 2.0);
    let sn = g.constant(s);
    let half = g.constant(s / 2.0);
    let scaled = g.mul(sn, inner);
    let shifted = g.sub(scaled, half);
    let sig = g.sigmoid(shifted);
    let k = g.constant(1.0 + e);
    let num0 = g.mul(k, sig);
    let one = g.constant(1.0);
    let num = g.sub(num0, one);
    let den = g.constant(e - 1.0);
    let v = g.div(num, den);
    g.clamp01(v)
}

pub fn dl2_leq(g: &mut Graph, x: NodeId, y: NodeId) -> NodeId {
    let d = g.sub(x, y);
    let zero = g.constant(0.0);
    g.max(d, zero)
}

/// `1 - max(x - y, 0) / (|x| + |y|)`, selecting 1 whenever `x ≤ y` so the
/// denominator is only evaluated where it is positive.
pub fn fuzzy_leq(g: &mut Graph, x: NodeId, y: NodeId) -> NodeId {
    let d = g.sub(x, y);
    let ax = g.abs(x);
    let ay = g.abs(y);
    let den = g.add(ax, ay);
    let one = g.constant(1.0);
    let divisor = g.select(Cmp::Le, x, y, one, den);
    let q = g.div(d, divisor);
    let violated = g.one_minus(q);
    g.select(Cmp::Le, x, y, one, violated)
}
