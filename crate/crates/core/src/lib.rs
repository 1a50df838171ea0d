//! Differentiable logics for constraint-guided learning.
//!
//! - [`logic`]: scalar operators of DL2 and the fuzzy logics.
//! - [`graph`]: a small reverse-mode computation graph.
//! - [`relax`]: graph builders for those operators.
//! - [`dsl`]: the constraint language and its lowering.
//! - [`analysis`]: consistency integrals and derivative properties.
//! - [`train`]: constraint-guided training with counterexamples.
//! - [`gradcheck`]: finite-difference checks of operators and losses.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod dsl;
pub mod gradcheck;
pub mod graph;
pub mod logic;
pub mod relax;
pub mod train;

pub use logic::{LogicConfig, LogicError, LogicKind};
