//! The standard constraints and their evaluation against a model.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dsl::{
    expand, holds, lower, lower_margin, parse_constraint, push_negation, Constraint, Leaf, LeafResolver, LowerError,
    Valuation, Which,
};
use crate::graph::{Graph, NodeId};
use crate::logic::LogicConfig;
use crate::relax::Relaxation;

use super::model::{softmax_backward, Gradients, Model, Trace};
use super::TrainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    /// `‖N(xadv) − N(x0)‖∞ ≤ δ`.
    Robustness,
    /// Every group's probability is at most δ or at least 1 − δ.
    Groups,
    /// For each triple (a, b, c): if class a is at least as likely as
    /// uniform, b is at least as likely as c.
    ClassSimilarity,
    /// A user-supplied formula.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintConfig {
    pub kind: ConstraintKind,
    /// ℓ∞ radius of the counterexample ball.
    pub epsilon: f64,
    pub delta: f64,
    /// Class partition for [`ConstraintKind::Groups`]; group `i` is named `g{i}`.
    pub groups: Vec<Vec<usize>>,
    pub triples: Vec<[usize; 3]>,
    /// Constraint source for [`ConstraintKind::Custom`]. A `forall_ball`
    /// prefix overrides `epsilon`.
    pub formula: Option<String>,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        ConstraintConfig {
            kind: ConstraintKind::Robustness,
            epsilon: 0.1,
            delta: 0.05,
            groups: Vec::new(),
            triples: Vec::new(),
            formula: None,
        }
    }
}

/// Group names and their member classes.
pub type GroupTable = Vec<(String, Vec<usize>)>;

impl ConstraintConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(TrainError::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(TrainError::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    pub fn group_table(&self) -> GroupTable {
        self.groups.iter().enumerate().map(|(i, g)| (format!("g{i}"), g.clone())).collect()
    }

    /// Constraint source text for `classes` output classes.
    pub fn source(&self, classes: usize) -> Result<String, TrainError> {
        let (eps, delta) = (self.epsilon, self.delta);
        Ok(match self.kind {
            ConstraintKind::Robustness => format!("forall_ball({eps}): inf_norm_diff() <= {delta}"),
            ConstraintKind::Groups => {
                if self.groups.is_empty() {
                    return Err(TrainError::Config("the groups constraint needs at least one group".into()));
                }
                let names: Vec<String> = self.group_table().into_iter().map(|(n, _)| n).collect();
                format!(
                    "forall_ball({eps}): all g in [{}] {{ group(g) <= {delta} | group(g) >= 1 - {delta} }}",
                    names.join(", ")
                )
            }
            ConstraintKind::ClassSimilarity => {
                if self.triples.is_empty() {
                    return Err(TrainError::Config("the class-similarity constraint needs at least one triple".into()));
                }
                let tuples: Vec<String> = self.triples.iter().map(|[a, b, c]| format!("({a}, {b}, {c})")).collect();
                format!(
                    "forall_ball({eps}): all (a, b, c) in [{}] {{ N(xadv)[a] >= 1 / {classes} -> N(xadv)[b] >= N(xadv)[c] }}",
                    tuples.join(", ")
                )
            }
            ConstraintKind::Custom => self
                .formula
                .clone()
                .ok_or_else(|| TrainError::Config("a custom constraint needs a formula".into()))?,
        })
    }

    /// Parses the constraint, filling in `epsilon` when the source has no ball.
    pub fn build(&self, classes: usize) -> Result<Constraint, TrainError> {
        self.validate()?;
        let mut c = parse_constraint(&self.source(classes)?)?;
        if c.epsilon.is_none() {
            c.epsilon = Some(self.epsilon);
        }
        Ok(c)
    }
}

/// Triples (a, b, c) where b is the class whose centroid is nearest to a's
/// and c the farthest.
pub fn similarity_triples(centroids: &[Vec<f64>]) -> Vec<[usize; 3]> {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let n = centroids.len();
    if n < 3 {
        return Vec::new();
    }
    (0..n)
        .map(|a| {
            let others = (0..n).filter(|&k| k != a);
            let d = |k: &usize| dist(&centroids[a], &centroids[*k]);
            let near = others.clone().min_by(|x, y| d(x).total_cmp(&d(y))).unwrap();
            let far = others.max_by(|x, y| d(x).total_cmp(&d(y))).unwrap();
            [a, near, far]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Prob(Which, usize),
    Input(Which, usize),
}

struct Binder<'a> {
    slots: &'a mut Vec<Slot>,
    cache: Vec<(Leaf, NodeId)>,
    groups: &'a GroupTable,
    classes: usize,
    input_dim: usize,
}

impl Binder<'_> {
    fn slot(&mut self, g: &mut Graph, s: Slot) -> NodeId {
        let leaf = match s {
            Slot::Prob(w, k) => Leaf::NetOut(w, k),
            Slot::Input(w, i) => Leaf::Input(w, i),
        };
        if let Some((_, n)) = self.cache.iter().find(|(l, _)| *l == leaf) {
            return *n;
        }
        let n = g.input();
        debug_assert_eq!(g.input_count(), self.slots.len() + 1);
        self.slots.push(s);
        self.cache.push((leaf, n));
        n
    }
}

impl LeafResolver for Binder<'_> {
    fn leaf(&mut self, g: &mut Graph, leaf: &Leaf) -> Result<NodeId, LowerError> {
        let unbound = || LowerError::Unbound(leaf.clone());
        match leaf {
            Leaf::NetOut(w, k) if *k < self.classes => Ok(self.slot(g, Slot::Prob(*w, *k))),
            Leaf::Input(w, i) if *i < self.input_dim => Ok(self.slot(g, Slot::Input(*w, *i))),
            Leaf::Group(w, name) => {
                let members = self.groups.iter().find(|(n, _)| n == name).ok_or_else(unbound)?.1.clone();
                if members.is_empty() || members.iter().any(|&k| k >= self.classes) {
                    return Err(unbound());
                }
                let mut acc = self.slot(g, Slot::Prob(*w, members[0]));
                for &k in &members[1..] {
                    let p = self.slot(g, Slot::Prob(*w, k));
                    acc = g.add(acc, p);
                }
                Ok(acc)
            }
            Leaf::InfNormDiff => {
                let mut acc: Option<NodeId> = None;
                for k in 0..self.classes {
                    let a = self.slot(g, Slot::Prob(Which::Xadv, k));
                    let b = self.slot(g, Slot::Prob(Which::X0, k));
                    let d = g.sub(a, b);
                    let d = g.abs(d);
                    acc = Some(match acc {
                        None => d,
                        Some(m) => g.max(m, d),
                    });
                }
                acc.ok_or_else(unbound)
            }
            _ => Err(unbound()),
        }
    }
}

/// The values a constraint is evaluated at.
#[derive(Debug, Clone, Copy)]
pub struct Point<'a> {
    pub p0: &'a [f64],
    pub padv: &'a [f64],
    pub x0: &'a [f64],
    pub xadv: &'a [f64],
}

struct Exact<'a> {
    point: Point<'a>,
    groups: &'a GroupTable,
}

impl Exact<'_> {
    fn probs(&self, w: Which) -> &[f64] {
        match w {
            Which::X0 => self.point.p0,
            Which::Xadv => self.point.padv,
        }
    }
}

impl Valuation for Exact<'_> {
    fn leaf(&self, leaf: &Leaf) -> Option<f64> {
        match leaf {
            Leaf::NetOut(w, k) => self.probs(*w).get(*k).copied(),
            Leaf::Input(Which::X0, i) => self.point.x0.get(*i).copied(),
            Leaf::Input(Which::Xadv, i) => self.point.xadv.get(*i).copied(),
            Leaf::Group(w, name) => {
                let members = &self.groups.iter().find(|(n, _)| n == name)?.1;
                let p = self.probs(*w);
                members.iter().map(|&k| p.get(k).copied()).sum()
            }
            Leaf::InfNormDiff => {
                Some(self.point.padv.iter().zip(self.point.p0).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max))
            }
        }
    }
}

/// Result of evaluating a constraint at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Relaxed loss; 0 when the constraint is fully satisfied.
    pub loss: f64,
    /// Signed violation margin, positive where the exact constraint fails.
    pub margin: f64,
    /// Exact two-valued truth.
    pub satisfied: bool,
}

/// Gradients of a scalar with respect to the constraint's leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafGradient {
    pub p0: Vec<f64>,
    pub padv: Vec<f64>,
    pub x0: Vec<f64>,
    pub xadv: Vec<f64>,
}

impl LeafGradient {
    pub fn is_zero(&self) -> bool {
        [&self.p0, &self.padv, &self.x0, &self.xadv].iter().all(|v| v.iter().all(|d| *d == 0.0))
    }
}

/// A constraint compiled once for a logic and a model shape.
#[derive(Debug, Clone)]
pub struct ConstraintEval {
    constraint: Constraint,
    expanded: crate::dsl::Formula,
    logic: LogicConfig,
    groups: GroupTable,
    graph: Graph,
    loss_root: NodeId,
    margin_root: NodeId,
    slots: Vec<Slot>,
    values: Vec<f64>,
    classes: usize,
    input_dim: usize,
}

impl ConstraintEval {
    pub fn new(
        constraint: &Constraint,
        logic: LogicConfig,
        groups: &GroupTable,
        classes: usize,
        input_dim: usize,
    ) -> Result<Self, TrainError> {
        let rx = Relaxation::new(logic)?;
        let nnf = push_negation(&constraint.formula)?;
        let mut graph = Graph::new();
        let mut slots = Vec::new();
        let mut b = Binder { slots: &mut slots, cache: Vec::new(), groups, classes, input_dim };
        let truth = lower(if rx.is_fuzzy() { &constraint.formula } else { &nnf }, &rx, &mut graph, &mut b)?;
        let loss_root = rx.loss(&mut graph, truth);
        let margin_root = lower_margin(&nnf, &mut graph, &mut b)?;
        let expanded = expand(&constraint.formula)?;
        Ok(ConstraintEval {
            constraint: constraint.clone(),
            expanded,
            logic,
            groups: groups.clone(),
            values: vec![0.0; slots.len()],
            graph,
            loss_root,
            margin_root,
            slots,
            classes,
            input_dim,
        })
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn epsilon(&self) -> f64 {
        self.constraint.epsilon.unwrap_or(0.0)
    }

    pub fn logic(&self) -> &LogicConfig {
        &self.logic
    }

    pub fn groups(&self) -> &GroupTable {
        &self.groups
    }

    /// Whether the constraint reads `N(x0)`, so that its gradient reaches
    /// the parameters through the clean input as well.
    pub fn uses_clean_output(&self) -> bool {
        self.slots.iter().any(|s| matches!(s, Slot::Prob(Which::X0, _)))
    }

    pub fn evaluate(&mut self, p: Point<'_>) -> Result<Evaluation, TrainError> {
        if p.p0.len() != self.classes || p.padv.len() != self.classes {
            return Err(TrainError::Config(format!("expected {} class probabilities", self.classes)));
        }
        if p.x0.len() != self.input_dim || p.xadv.len() != self.input_dim {
            return Err(TrainError::Config(format!("expected inputs of width {}", self.input_dim)));
        }
        for (v, s) in self.values.iter_mut().zip(&self.slots) {
            *v = match *s {
                Slot::Prob(Which::X0, k) => p.p0[k],
                Slot::Prob(Which::Xadv, k) => p.padv[k],
                Slot::Input(Which::X0, i) => p.x0[i],
                Slot::Input(Which::Xadv, i) => p.xadv[i],
            };
        }
        let top = if self.margin_root > self.loss_root { self.margin_root } else { self.loss_root };
        self.graph.eval(top, &self.values)?;
        let loss = self.graph.value(self.loss_root);
        let margin = self.graph.value(self.margin_root);
        let satisfied = holds(&self.expanded, &Exact { point: p, groups: &self.groups })?;
        Ok(Evaluation { loss, margin, satisfied })
    }

    fn gradient(&mut self, root: NodeId) -> LeafGradient {
        let d = self.graph.backward(root);
        let mut out = LeafGradient {
            p0: vec![0.0; self.classes],
            padv: vec![0.0; self.classes],
            x0: vec![0.0; self.input_dim],
            xadv: vec![0.0; self.input_dim],
        };
        for (s, v) in self.slots.iter().zip(d) {
            match *s {
                Slot::Prob(Which::X0, k) => out.p0[k] += v,
                Slot::Prob(Which::Xadv, k) => out.padv[k] += v,
                Slot::Input(Which::X0, i) => out.x0[i] += v,
                Slot::Input(Which::Xadv, i) => out.xadv[i] += v,
            }
        }
        out
    }

    /// Gradient of the loss at the point last passed to [`Self::evaluate`].
    pub fn loss_gradient(&mut self) -> LeafGradient {
        self.gradient(self.loss_root)
    }

    /// Gradient of the margin at the point last passed to [`Self::evaluate`].
    pub fn margin_gradient(&mut self) -> LeafGradient {
        self.gradient(self.margin_root)
    }

    /// Evaluates the constraint on a model at `(x0, xadv)`.
    pub fn evaluate_model(&mut self, model: &Model, x0: &[f64], xadv: &[f64]) -> Result<Evaluation, TrainError> {
        let p0 = model.predict(x0);
        let padv = model.predict(xadv);
        self.evaluate(Point { p0: &p0, padv: &padv, x0, xadv })
    }

    /// Loss at `(x0, xadv)` and its parameter gradient, accumulated into
    /// `grads` with weight `scale`.
    #[allow(clippy::too_many_arguments)]
    pub fn accumulate(
        &mut self,
        model: &Model,
        clean: &Trace,
        adv: &Trace,
        x0: &[f64],
        xadv: &[f64],
        scale: f64,
        grads: &mut Gradients,
    ) -> Result<f64, TrainError> {
        let e = self.evaluate(Point { p0: &clean.probs, padv: &adv.probs, x0, xadv })?;
        let d = self.loss_gradient();
        let mut push = |trace: &Trace, dp: &[f64]| {
            if dp.iter().any(|v| *v != 0.0) {
                let mut dz = softmax_backward(&trace.probs, dp);
                dz.iter_mut().for_each(|v| *v *= scale);
                model.backward(trace, &dz, Some(grads));
            }
        };
        push(adv, &d.padv);
        push(clean, &d.p0);
        Ok(e.loss)
    }

    /// Gradient of the loss (or margin) with respect to `xadv`, through the
    /// model as well as through direct input leaves.
    pub fn input_gradient(&mut self, model: &Model, adv: &Trace, d: &LeafGradient) -> Vec<f64> {
        let mut dx = d.xadv.clone();
        if d.padv.iter().any(|v| *v != 0.0) {
            let dz = softmax_backward(&adv.probs, &d.padv);
            for (a, b) in dx.iter_mut().zip(model.backward(adv, &dz, None)) {
                *a += b;
            }
        }
        dx
    }
}

impl core::fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            ConstraintKind::Robustness => "robustness",
            ConstraintKind::Groups => "groups",
            ConstraintKind::ClassSimilarity => "class-similarity",
            ConstraintKind::Custom => "custom",
        })
    }
}

impl core::str::FromStr for ConstraintKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "robustness" => ConstraintKind::Robustness,
            "groups" => ConstraintKind::Groups,
            "class-similarity" => ConstraintKind::ClassSimilarity,
            "custom" => ConstraintKind::Custom,
            _ => return Err(s.to_string()),
        })
    }
}
