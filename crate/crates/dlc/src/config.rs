//! Training configuration files: TOML with the field names of
//! [`TrainConfig`]; omitted fields take their defaults.

use std::fs;
use std::path::Path;

use dlc_core::train::TrainConfig;

use crate::error::{Error, Result};

pub fn parse(text: &str, path: &Path) -> Result<TrainConfig> {
    toml::from_str(text).map_err(|source| Error::Config { path: path.into(), source })
}

pub fn load(path: &Path) -> Result<TrainConfig> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    parse(&text, path)
}

pub fn to_toml(cfg: &TrainConfig) -> String {
    toml::to_string(cfg).expect("train configs are representable in TOML")
}
