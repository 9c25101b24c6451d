//! Scenario files (TOML) and their reproducibility digest.

use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::sim::{Scenario, SimError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid field `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let sc: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
        message: e.message().to_string(),
    })?;
    sc.validate().map_err(|e| match e {
        SimError::Invalid { field, reason } => ScenarioError::Validation { field, reason },
        other => ScenarioError::Validation {
            field: "scenario".into(),
            reason: other.to_string(),
        },
    })?;
    Ok(sc)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text)
}

/// Canonical TOML form of a scenario.
pub fn scenario_to_toml(sc: &Scenario) -> String {
    toml::to_string(sc).expect("scenarios always serialize")
}

pub fn save_scenario(sc: &Scenario, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, scenario_to_toml(sc))
}

/// SHA-256 of the canonical TOML form, hex encoded.
pub fn scenario_digest(sc: &Scenario) -> String {
    hex::encode(Sha256::digest(scenario_to_toml(sc).as_bytes()))
}
