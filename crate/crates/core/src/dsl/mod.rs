//! The constraint language: syntax tree, parser, printer and lowering to
//! computation graphs.

pub mod ast;
pub mod lower;
pub mod margin;
pub mod nnf;
pub mod parse;
pub mod print;
pub mod semantics;

use alloc::string::String;
use core::fmt;

pub use ast::*;
pub use lower::{lower, lower_term, LeafResolver};
pub use margin::lower_margin;
pub use nnf::push_negation;
pub use parse::{parse, parse_constraint, ParseError, ParseErrorKind};
pub use print::{print, print_constraint};
pub use semantics::{expand, holds, Leaf, Valuation};

use crate::graph::GraphError;
use crate::logic::LogicError;

#[derive(Debug, Clone, PartialEq)]
pub enum LowerError {
    /// Propositional variables have no meaning under DL2.
    PropositionalVariable(String),
    /// DL2 formulas must be in negation normal form before lowering.
    Dl2Negation,
    /// Only propositional variables and connectives are allowed here.
    NotPropositional,
    UnboundProp(String),
    UnboundVariable(String),
    Unbound(Leaf),
    /// A quantifier variable was used as an index but bound to a group name,
    /// or the other way round.
    BindingType { var: String, value: String },
    EmptyDomain,
    Logic(LogicError),
    Graph(GraphError),
}

impl fmt::Display for LowerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LowerError::PropositionalVariable(p) => {
                write!(f, "propositional variable `{p}` cannot be negated under DL2")
            }
            LowerError::Dl2Negation => f.write_str("DL2 has no negation; push negations into comparisons first"),
            LowerError::NotPropositional => f.write_str("expected a purely propositional formula"),
            LowerError::UnboundProp(p) => write!(f, "no value for propositional variable `{p}`"),
            LowerError::UnboundVariable(v) => write!(f, "unbound variable `{v}`"),
            LowerError::Unbound(leaf) => write!(f, "no value for {leaf:?}"),
            LowerError::BindingType { var, value } => {
                write!(f, "variable `{var}` bound to `{value}` of the wrong kind")
            }
            LowerError::EmptyDomain => f.write_str("quantifier over an empty domain"),
            LowerError::Logic(e) => write!(f, "{e}"),
            LowerError::Graph(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for LowerError {}

impl From<LogicError> for LowerError {
    fn from(e: LogicError) -> Self {
        LowerError::Logic(e)
    }
}

impl From<GraphError> for LowerError {
    fn from(e: GraphError) -> Self {
        LowerError::Graph(e)
    }
}
