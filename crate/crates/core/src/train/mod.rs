//! Constraint-guided training at desk scale: a dense softmax classifier,
//! PGD counterexamples, GradNorm loss balancing and the standard
//! constraints.

pub mod constraint;
pub mod data;
pub mod gradnorm;
pub mod model;
pub mod pgd;
pub mod tensor;
mod trainer;

use alloc::string::String;
use core::fmt;

pub use constraint::{ConstraintConfig, ConstraintEval, ConstraintKind, Evaluation, GroupTable, Point};
pub use data::{blobs, BlobSpec, Dataset};
pub use gradnorm::{gradnorm_update, GradNormConfig, GradNormState};
pub use model::{cross_entropy, softmax, Activation, Dense, Gradients, Model};
pub use pgd::{pgd_attack, Attack, PgdConfig};
pub use tensor::{ShapeError, Tensor};
pub use trainer::*;

use crate::dsl::{LowerError, ParseError};
use crate::graph::GraphError;
use crate::logic::LogicError;

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    Config(String),
    Parse(ParseError),
    Lower(LowerError),
    Shape(ShapeError),
    Label(model::LabelError),
    EmptyDataset,
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::Config(m) => write!(f, "invalid configuration: {m}"),
            TrainError::Parse(e) => write!(f, "constraint: {e}"),
            TrainError::Lower(e) => write!(f, "constraint: {e}"),
            TrainError::Shape(e) => e.fmt(f),
            TrainError::Label(e) => e.fmt(f),
            TrainError::EmptyDataset => f.write_str("empty dataset"),
        }
    }
}

impl core::error::Error for TrainError {}

impl From<ParseError> for TrainError {
    fn from(e: ParseError) -> Self {
        TrainError::Parse(e)
    }
}

impl From<LowerError> for TrainError {
    fn from(e: LowerError) -> Self {
        TrainError::Lower(e)
    }
}

impl From<LogicError> for TrainError {
    fn from(e: LogicError) -> Self {
        TrainError::Lower(LowerError::Logic(e))
    }
}

impl From<GraphError> for TrainError {
    fn from(e: GraphError) -> Self {
        TrainError::Lower(LowerError::Graph(e))
    }
}

impl From<ShapeError> for TrainError {
    fn from(e: ShapeError) -> Self {
        TrainError::Shape(e)
    }
}

impl From<model::LabelError> for TrainError {
    fn from(e: model::LabelError) -> Self {
        TrainError::Label(e)
    }
}
