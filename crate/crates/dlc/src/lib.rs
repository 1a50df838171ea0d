//! Command-line front end and file formats for `dlc-core`.
//!
//! - [`data`]: CSV and IDX datasets.
//! - [`checkpoint`]: model files.
//! - [`metrics`]: training histories.
//! - [`config`]: TOML training configurations.
//! - [`table`]: multi-threaded consistency tables.
//! - [`cli`]: the `dlc` command.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod metrics;
pub mod report;
pub mod table;

pub use dlc_core as core;
pub use error::{Error, Result};
