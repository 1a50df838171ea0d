//! Numerical checks of logic properties: consistency integrals,
//! shadow-lifting of conjunctions and derivative behaviour of implications.

pub mod consistency;
pub mod implication;
pub mod program;
pub mod shadow;
pub mod suite;

use core::fmt;

pub use consistency::{consistency, consistency_table, ConsistencyReport, Estimate, Method};
pub use implication::{mp_mt_analysis, DerivativeReport, MpMtConfig};
pub use program::Program;
pub use shadow::{shadow_lifting_check, ShadowLifting};
pub use suite::{Tautology, TautologySuite};

use crate::dsl::LowerError;
use crate::graph::GraphError;
use crate::logic::LogicError;

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    Budget { min: usize, got: usize },
    TooManyVariables { count: usize, max: usize },
    Lower(LowerError),
    Graph(GraphError),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::Budget { min, got } => write!(f, "sample budget {got} is below the minimum {min}"),
            AnalysisError::TooManyVariables { count, max } => {
                write!(f, "formula has {count} variables, at most {max} are supported")
            }
            AnalysisError::Lower(e) => write!(f, "{e}"),
            AnalysisError::Graph(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for AnalysisError {}

impl From<LowerError> for AnalysisError {
    fn from(e: LowerError) -> Self {
        AnalysisError::Lower(e)
    }
}

impl From<LogicError> for AnalysisError {
    fn from(e: LogicError) -> Self {
        AnalysisError::Lower(LowerError::Logic(e))
    }
}

impl From<GraphError> for AnalysisError {
    fn from(e: GraphError) -> Self {
        AnalysisError::Graph(e)
    }
}
