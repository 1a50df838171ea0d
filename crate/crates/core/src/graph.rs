//! Scalar computation graph with reverse-mode differentiation.
//!
//! Nodes are appended in topological order, so every child id is smaller
//! than its parent's id. Inputs are numbered in declaration order and bound
//! positionally on [`Graph::eval`].
//!
//! Kink conventions:
//! * `min`/`max` ties send the whole adjoint to the first argument.
//! * `abs` uses the right derivative (`+1`) at zero.
//! * `clamp01` passes the adjoint on the closed interval `[0, 1]`.
//! * `indicator-eq` and the comparison inside `select` carry no gradient.
//! * `pow` with a zero base has zero derivative in the exponent and derivative
//!   in the base `1` if the exponent is exactly `1`, else `0`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Const(f64),
    /// Positional input slot.
    Input(usize),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Div(NodeId, NodeId),
    Neg(NodeId),
    Min(NodeId, NodeId),
    Max(NodeId, NodeId),
    Abs(NodeId),
    Exp(NodeId),
    Ln(NodeId),
    Pow(NodeId, NodeId),
    Sigmoid(NodeId),
    Clamp01(NodeId),
    /// `1` if both operands are exactly equal, else `0`.
    IndicatorEq(NodeId, NodeId),
    /// `then` if `lhs cmp rhs` holds, else `otherwise`.
    Select {
        cmp: Cmp,
        lhs: NodeId,
        rhs: NodeId,
        then: NodeId,
        otherwise: NodeId,
    },
}

impl Op {
    pub fn mnemonic(&self) -> &'static str {
        match self {
            Op::Const(_) => "const",
            Op::Input(_) => "input",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::Div(..) => "div",
            Op::Neg(_) => "neg",
            Op::Min(..) => "min",
            Op::Max(..) => "max",
            Op::Abs(_) => "abs",
            Op::Exp(_) => "exp",
            Op::Ln(_) => "ln",
            Op::Pow(..) => "pow",
            Op::Sigmoid(_) => "sigmoid",
            Op::Clamp01(_) => "clamp01",
            Op::IndicatorEq(..) => "indicator-eq",
            Op::Select { cmp: Cmp::Lt, .. } => "select-lt",
            Op::Select { cmp: Cmp::Le, .. } => "select-le",
        }
    }

    fn children(&self) -> ([Option<NodeId>; 4], usize) {
        let n = None;
        match *self {
            Op::Const(_) | Op::Input(_) => ([n; 4], 0),
            Op::Neg(a) | Op::Abs(a) | Op::Exp(a) | Op::Ln(a) | Op::Sigmoid(a) | Op::Clamp01(a) => {
                ([Some(a), n, n, n], 1)
            }
            Op::Add(a, b)
            | Op::Sub(a, b)
            | Op::Mul(a, b)
            | Op::Div(a, b)
            | Op::Min(a, b)
            | Op::Max(a, b)
            | Op::Pow(a, b)
            | Op::IndicatorEq(a, b) => ([Some(a), Some(b), n, n], 2),
            Op::Select { lhs, rhs, then, otherwise, .. } => {
                ([Some(lhs), Some(rhs), Some(then), Some(otherwise)], 4)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    UnboundInput { slot: usize },
    Domain { node: NodeId, op: &'static str, value: f64 },
    UnknownNode { node: NodeId },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::UnboundInput { slot } => write!(f, "input slot {slot} is unbound"),
            GraphError::Domain { node, op, value } => {
                write!(f, "node {node} ({op}) is undefined at operand {value}")
            }
            GraphError::UnknownNode { node } => write!(f, "node {node} does not exist"),
        }
    }
}

impl core::error::Error for GraphError {}

#[derive(Debug, Clone)]
struct Node {
    op: Op,
    value: f64,
    adjoint: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    inputs: Vec<NodeId>,
    /// Highest node evaluated by the last successful `eval`.
    evaluated: Option<NodeId>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn op(&self, id: NodeId) -> Op {
        self.nodes[id.index()].op
    }

    pub fn value(&self, id: NodeId) -> f64 {
        self.nodes[id.index()].value
    }

    pub fn adjoint(&self, id: NodeId) -> f64 {
        self.nodes[id.index()].adjoint
    }

    fn push(&mut self, op: Op) -> NodeId {
        let (children, n) = op.children();
        let id = NodeId(self.nodes.len() as u32);
        debug_assert!(children[..n].iter().all(|c| c.unwrap() < id));
        self.nodes.push(Node { op, value: 0.0, adjoint: 0.0 });
        self.evaluated = None;
        id
    }

    pub fn input(&mut self) -> NodeId {
        let slot = self.inputs.len();
        let id = self.push(Op::Input(slot));
        self.inputs.push(id);
        id
    }

    pub fn constant(&mut self, v: f64) -> NodeId {
        self.push(Op::Const(v))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Mul(a, b))
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Div(a, b))
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        self.push(Op::Neg(a))
    }

    pub fn min(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Min(a, b))
    }

    pub fn max(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Max(a, b))
    }

    pub fn abs(&mut self, a: NodeId) -> NodeId {
        self.push(Op::Abs(a))
    }

    pub fn exp(&mut self, a: NodeId) -> NodeId {
        self.push(Op::Exp(a))
    }

    pub fn ln(&mut self, a: NodeId) -> NodeId {
        self.push(Op::Ln(a))
    }

    pub fn pow(&mut self, base: NodeId, exponent: NodeId) -> NodeId {
        self.push(Op::Pow(base, exponent))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.push(Op::Sigmoid(a))
    }

    pub fn clamp01(&mut self, a: NodeId) -> NodeId {
        self.push(Op::Clamp01(a))
    }

    pub fn indicator_eq(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::IndicatorEq(a, b))
    }

    pub fn select(&mut self, cmp: Cmp, lhs: NodeId, rhs: NodeId, then: NodeId, otherwise: NodeId) -> NodeId {
        self.push(Op::Select { cmp, lhs, rhs, then, otherwise })
    }

    pub fn one_minus(&mut self, a: NodeId) -> NodeId {
        let one = self.constant(1.0);
        self.sub(one, a)
    }

    fn check(&self, id: NodeId) -> Result<(), GraphError> {
        if id.index() < self.nodes.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownNode { node: id })
        }
    }

    /// Evaluates every node up to and including `root` and returns its value.
    pub fn eval(&mut self, root: NodeId, inputs: &[f64]) -> Result<f64, GraphError> {
        self.check(root)?;
        self.evaluated = None;
        for i in 0..=root.index() {
            let v = {
                let val = |id: NodeId| self.nodes[id.index()].value;
                let id = NodeId(i as u32);
                match self.nodes[i].op {
                    Op::Const(c) => c,
                    Op::Input(slot) => *inputs.get(slot).ok_or(GraphError::UnboundInput { slot })?,
                    Op::Add(a, b) => val(a) + val(b),
                    Op::Sub(a, b) => val(a) - val(b),
                    Op::Mul(a, b) => val(a) * val(b),
                    Op::Div(a, b) => {
                        let d = val(b);
                        if d == 0.0 {
                            return Err(GraphError::Domain { node: id, op: "div", value: d });
                        }
                        val(a) / d
                    }
                    Op::Neg(a) => -val(a),
                    Op::Min(a, b) => {
                        let (x, y) = (val(a), val(b));
                        if x <= y {
                            x
                        } else {
                            y
                        }
                    }
                    Op::Max(a, b) => {
                        let (x, y) = (val(a), val(b));
                        if x >= y {
                            x
                        } else {
                            y
                        }
                    }
                    Op::Abs(a) => val(a).abs(),
                    Op::Exp(a) => libm::exp(val(a)),
                    Op::Ln(a) => {
                        let x = val(a);
                        if x <= 0.0 {
                            return Err(GraphError::Domain { node: id, op: "ln", value: x });
                        }
                        libm::log(x)
                    }
                    Op::Pow(a, b) => {
                        let (x, y) = (val(a), val(b));
                        if x < 0.0 {
                            return Err(GraphError::Domain { node: id, op: "pow", value: x });
                        }
                        libm::pow(x, y)
                    }
                    Op::Sigmoid(a) => crate::logic::sigmoid(val(a)),
                    Op::Clamp01(a) => val(a).clamp(0.0, 1.0),
                    Op::IndicatorEq(a, b) => {
                        if val(a) == val(b) {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    Op::Select { cmp, lhs, rhs, then, otherwise } => {
                        if compare(cmp, val(lhs), val(rhs)) {
                            val(then)
                        } else {
                            val(otherwise)
                        }
                    }
                }
            };
            self.nodes[i].value = v;
        }
        self.evaluated = Some(root);
        Ok(self.nodes[root.index()].value)
    }

    /// Reverse accumulation from `root`, which must have been evaluated.
    /// Returns the gradient with respect to each input slot.
    pub fn backward(&mut self, root: NodeId) -> Vec<f64> {
        assert!(
            self.evaluated.is_some_and(|e| e >= root),
            "backward called before eval of node {root}"
        );
        for n in &mut self.nodes[..=root.index()] {
            n.adjoint = 0.0;
        }
        self.nodes[root.index()].adjoint = 1.0;
        for i in (0..=root.index()).rev() {
            let adj = self.nodes[i].adjoint;
            if adj == 0.0 {
                continue;
            }
            let value = self.nodes[i].value;
            let op = self.nodes[i].op;
            let val = |id: NodeId| self.nodes[id.index()].value;
            let mut push = [(NodeId(0), 0.0); 2];
            let mut count = 0;
            let mut emit = |id: NodeId, d: f64| {
                push[count] = (id, d);
                count += 1;
            };
            match op {
                Op::Const(_) | Op::Input(_) | Op::IndicatorEq(..) => {}
                Op::Add(a, b) => {
                    emit(a, adj);
                    emit(b, adj);
                }
                Op::Sub(a, b) => {
                    emit(a, adj);
                    emit(b, -adj);
                }
                Op::Mul(a, b) => {
                    emit(a, adj * val(b));
                    emit(b, adj * val(a));
                }
                Op::Div(a, b) => {
                    let d = val(b);
                    emit(a, adj / d);
                    emit(b, -adj * val(a) / (d * d));
                }
                Op::Neg(a) => emit(a, -adj),
                Op::Min(a, b) => {
                    if val(a) <= val(b) {
                        emit(a, adj)
                    } else {
                        emit(b, adj)
                    }
                }
                Op::Max(a, b) => {
                    if val(a) >= val(b) {
                        emit(a, adj)
                    } else {
                        emit(b, adj)
                    }
                }
                Op::Abs(a) => emit(a, if val(a) >= 0.0 { adj } else { -adj }),
                Op::Exp(a) => emit(a, adj * value),
                Op::Ln(a) => emit(a, adj / val(a)),
                Op::Pow(a, b) => {
                    let (x, y) = (val(a), val(b));
                    if x == 0.0 {
                        emit(a, if y == 1.0 { adj } else { 0.0 });
                    } else {
                        emit(a, adj * y * libm::pow(x, y - 1.0));
                        emit(b, adj * value * libm::log(x));
                    }
                }
                Op::Sigmoid(a) => emit(a, adj * value * (1.0 - value)),
                Op::Clamp01(a) => {
                    let x = val(a);
                    if (0.0..=1.0).contains(&x) {
                        emit(a, adj)
                    }
                }
                Op::Select { cmp, lhs, rhs, then, otherwise } => {
                    if compare(cmp, val(lhs), val(rhs)) {
                        emit(then, adj)
                    } else {
                        emit(otherwise, adj)
                    }
                }
            }
            for &(id, d) in &push[..count] {
                self.nodes[id.index()].adjoint += d;
            }
        }
        self.inputs
            .iter()
            .map(|id| if *id <= root { self.nodes[id.index()].adjoint } else { 0.0 })
            .collect()
    }

    /// Central-difference gradient of `root` with respect to each input.
    pub fn finite_diff(&mut self, root: NodeId, inputs: &[f64], h: f64) -> Result<Vec<f64>, GraphError> {
        assert!(h > 0.0, "finite difference step must be positive");
        let mut point = inputs.to_vec();
        let mut grad = vec![0.0; self.inputs.len()];
        for (slot, g) in grad.iter_mut().enumerate() {
            let orig = *point.get(slot).ok_or(GraphError::UnboundInput { slot })?;
            point[slot] = orig + h;
            let up = self.eval(root, &point)?;
            point[slot] = orig - h;
            let down = self.eval(root, &point)?;
            point[slot] = orig;
            *g = (up - down) / (2.0 * h);
        }
        self.eval(root, inputs)?;
        Ok(grad)
    }

    /// One node per line: `id op child-ids value adjoint`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let (children, count) = n.op.children();
            let _ = write!(out, "{i} {}", n.op.mnemonic());
            match n.op {
                Op::Const(c) => {
                    let _ = write!(out, "[{c}]");
                }
                Op::Input(slot) => {
                    let _ = write!(out, "[{slot}]");
                }
                _ => {}
            }
            out.push(' ');
            if count == 0 {
                out.push('-');
            }
            for (k, c) in children[..count].iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", c.unwrap());
            }
            let _ = writeln!(out, " {} {}", n.value, n.adjoint);
        }
        out
    }
}

#[inline]
fn compare(cmp: Cmp, a: f64, b: f64) -> bool {
    match cmp {
        Cmp::Lt => a < b,
        Cmp::Le => a <= b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_value_and_gradient() {
        let mut g = Graph::new();
        let x = g.input();
        let y = g.input();
        let r = g.mul(x, y);
        assert_eq!(g.eval(r, &[2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(g.backward(r), vec![3.0, 2.0]);
    }

    #[test]
    fn relu_of_difference() {
        let mut g = Graph::new();
        let x = g.input();
        let y = g.input();
        let d = g.sub(x, y);
        let z = g.constant(0.0);
        let r = g.max(d, z);
        assert_eq!(g.eval(r, &[21.0, 20.0]).unwrap(), 1.0);
    }

    #[test]
    fn sigmoid_at_zero() {
        let mut g = Graph::new();
        let x = g.input();
        let r = g.sigmoid(x);
        assert_eq!(g.eval(r, &[0.0]).unwrap(), 0.5);
        assert_eq!(g.backward(r), vec![0.25]);
    }

    #[test]
    fn tie_goes_to_first_argument() {
        let mut g = Graph::new();
        let x = g.input();
        let y = g.input();
        let mx = g.max(x, y);
        g.eval(mx, &[0.5, 0.5]).unwrap();
        assert_eq!(g.backward(mx), vec![1.0, 0.0]);
        let mn = g.min(x, y);
        g.eval(mn, &[0.5, 0.5]).unwrap();
        assert_eq!(g.backward(mn), vec![1.0, 0.0]);
        g.eval(mn, &[0.3, 0.7]).unwrap();
        assert_eq!(g.backward(mn), vec![1.0, 0.0]);
        g.eval(mn, &[0.9, 0.7]).unwrap();
        assert_eq!(g.backward(mn), vec![0.0, 1.0]);
    }

    #[test]
    fn square_finite_difference() {
        let mut g = Graph::new();
        let x = g.input();
        let r = g.mul(x, x);
        let fd = g.finite_diff(r, &[1.0], 1e-5).unwrap();
        assert!((fd[0] - 2.0).abs() < 1e-8);
        assert_eq!(g.backward(r), vec![2.0]);
    }

    #[test]
    fn indicator_has_no_gradient() {
        let mut g = Graph::new();
        let x = g.input();
        let y = g.input();
        let r = g.indicator_eq(x, y);
        assert_eq!(g.eval(r, &[2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(g.backward(r), vec![0.0, 0.0]);
        assert_eq!(g.eval(r, &[2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn clamp_and_select() {
        let mut g = Graph::new();
        let x = g.input();
        let c = g.clamp01(x);
        g.eval(c, &[0.5]).unwrap();
        assert_eq!(g.backward(c), vec![1.0]);
        g.eval(c, &[1.0]).unwrap();
        assert_eq!(g.backward(c), vec![1.0]);
        assert_eq!(g.eval(c, &[1.5]).unwrap(), 1.0);
        assert_eq!(g.backward(c), vec![0.0]);

        let mut g = Graph::new();
        let x = g.input();
        let y = g.input();
        let one = g.constant(1.0);
        let s = g.select(Cmp::Lt, x, y, one, y);
        assert_eq!(g.eval(s, &[0.4, 0.6]).unwrap(), 1.0);
        assert_eq!(g.backward(s), vec![0.0, 0.0]);
        assert_eq!(g.eval(s, &[0.6, 0.4]).unwrap(), 0.4);
        assert_eq!(g.backward(s), vec![0.0, 1.0]);
    }

    #[test]
    fn domain_errors_name_the_node() {
        let mut g = Graph::new();
        let x = g.input();
        let l = g.ln(x);
        assert!(matches!(g.eval(l, &[0.0]), Err(GraphError::Domain { op: "ln", node, .. }) if node == l));
        let z = g.constant(0.0);
        let d = g.div(x, z);
        assert!(matches!(g.eval(d, &[1.0]), Err(GraphError::Domain { op: "div", .. })));
        assert_eq!(g.eval(l, &[]), Err(GraphError::UnboundInput { slot: 0 }));
    }

    #[test]
    fn pow_at_zero_base() {
        let mut g = Graph::new();
        let b = g.input();
        let e = g.input();
        let p = g.pow(b, e);
        assert_eq!(g.eval(p, &[0.0, 0.0]).unwrap(), 1.0);
        let grad = g.backward(p);
        assert!(grad.iter().all(|v| v.is_finite()));
        assert_eq!(g.eval(p, &[0.0, 0.5]).unwrap(), 0.0);
        assert_eq!(g.backward(p), vec![0.0, 0.0]);
    }

    #[test]
    fn dump_format() {
        let mut g = Graph::new();
        let x = g.input();
        let y = g.input();
        let r = g.mul(x, y);
        g.eval(r, &[2.0, 3.0]).unwrap();
        g.backward(r);
        let dump = g.dump();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines, ["0 input[0] - 2 3", "1 input[1] - 3 2", "2 mul 0,1 6 1"]);
    }

    #[test]
    fn adjoint_linearity() {
        // a f + b g with f = x y, g = exp(x) - y
        let mut g = Graph::new();
        let x = g.input();
        let y = g.input();
        let f = g.mul(x, y);
        let ex = g.exp(x);
        let h = g.sub(ex, y);
        let (a, b) = (g.constant(0.7), g.constant(-1.3));
        let af = g.mul(a, f);
        let bh = g.mul(b, h);
        let sum = g.add(af, bh);
        let pt = [0.4, 1.7];
        g.eval(sum, &pt).unwrap();
        let combined = g.backward(sum);
        g.eval(f, &pt).unwrap();
        let gf = g.backward(f);
        g.eval(h, &pt).unwrap();
        let gh = g.backward(h);
        for i in 0..2 {
            assert!((combined[i] - (0.7 * gf[i] - 1.3 * gh[i])).abs() <= 1e-12);
        }
    }

    #[test]
    fn eval_is_reproducible() {
        let mut g = Graph::new();
        let x = g.input();
        let e = g.exp(x);
        let s = g.sigmoid(e);
        let l = g.ln(s);
        let a = g.eval(l, &[0.123]).unwrap();
        let b = g.eval(l, &[0.123]).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
