use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Le => a <= b,
            CmpOp::Lt => a < b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

/// Which network input a term refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Which {
    /// The data point.
    X0,
    /// The perturbed point found by the counterexample search.
    Xadv,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::X0 => "x0",
            Which::Xadv => "xadv",
        }
    }
}

/// A class or component index, possibly bound by a finite quantifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Index {
    Lit(usize),
    Var(String),
}

/// A group name, possibly bound by a finite quantifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupRef {
    Name(String),
    Var(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> char {
        match self {
            ArithOp::Add => '+',
            ArithOp::Sub => '-',
            ArithOp::Mul => '*',
            ArithOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Const(f64),
    /// Component of a raw network input.
    Input(Which, Index),
    /// Predicted probability of a class.
    NetOut(Which, Index),
    /// Summed probability of a class group.
    GroupProb(Which, GroupRef),
    /// `max_k |N(xadv)_k - N(x0)_k|`.
    InfNormDiff,
    Neg(Box<Term>),
    Bin(ArithOp, Box<Term>, Box<Term>),
}

/// A value a quantifier variable ranges over.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IndexValue {
    Int(usize),
    Name(String),
}

/// Finite conjunction or disjunction over explicit tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantifier {
    pub vars: Vec<String>,
    /// Each tuple has exactly `vars.len()` entries; never empty.
    pub domain: Vec<Vec<IndexValue>>,
    pub body: Box<Formula>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Compare(CmpOp, Term, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    BigAnd(Quantifier),
    BigOr(Quantifier),
    /// Propositional variable; only used for tautology analysis.
    Prop(String),
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn prop(name: &str) -> Formula {
        Formula::Prop(name.into())
    }

    pub fn compare(op: CmpOp, a: Term, b: Term) -> Formula {
        Formula::Compare(op, a, b)
    }

    /// Distinct propositional variables in order of first occurrence.
    pub fn props(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Prop(p) = f {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    pub fn has_props(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| found |= matches!(f, Formula::Prop(_)));
        found
    }

    pub fn has_comparisons(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| found |= matches!(f, Formula::Compare(..)));
        found
    }

    pub fn has_negation(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| found |= matches!(f, Formula::Not(_)));
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Compare(..) | Formula::Prop(_) => {}
            Formula::Not(a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::BigAnd(q) | Formula::BigOr(q) => q.body.visit(f),
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

/// A constraint as written by a user: an optional ℓ∞ ball radius for the
/// externalised universal quantifier plus the formula it guards.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub epsilon: Option<f64>,
    pub formula: Formula,
}
