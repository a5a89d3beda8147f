//! Scenario files (TOML or JSON).
//!
//! A file names a built-in to start from (`base`, default `"default"`) and
//! overrides any subset of its fields; tables merge key by key and arrays
//! replace wholesale:
//!
//! ```toml
//! id = "pricey-supplier"
//! schema_version = 1
//! base = "default"
//!
//! [params]
//! wholesale_price = 80.0
//! ```

use std::path::{Path, PathBuf};

use serde_json::Value;
use thiserror::Error;

use retail_sim_core::sim::SCHEMA_VERSION;
use retail_sim_core::year0;
use retail_sim_core::{Scenario, SimError};

pub const BUILTIN: [&str; 2] = ["default", "year0"];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("reading scenario {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("unknown scenario {0:?}")]
    Unknown(String),
    #[error("scenario TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scenario file must set schema_version (current is {SCHEMA_VERSION})")]
    MissingSchemaVersion,
    #[error("scenario file must be a table at the top level")]
    NotATable,
    #[error(transparent)]
    Invalid(#[from] SimError),
}

pub fn builtin(id: &str) -> Option<Scenario> {
    match id {
        "default" => Some(year0::default_scenario()),
        "year0" => Some(year0::scenario()),
        _ => None,
    }
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn from_document(mut doc: Value) -> Result<Scenario, ScenarioError> {
    let obj = doc.as_object_mut().ok_or(ScenarioError::NotATable)?;
    if !obj.contains_key("schema_version") {
        return Err(ScenarioError::MissingSchemaVersion);
    }
    let base_id = match obj.remove("base") {
        Some(Value::String(s)) => s,
        Some(other) => other.to_string(),
        None => "default".to_string(),
    };
    let base = builtin(&base_id).ok_or(ScenarioError::Unknown(base_id))?;
    let mut merged = serde_json::to_value(&base)?;
    merge(&mut merged, doc);
    let scenario: Scenario = serde_json::from_value(merged)?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn parse_toml(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: toml::Value = toml::from_str(text)?;
    from_document(serde_json::to_value(doc)?)
}

pub fn parse_json(text: &str) -> Result<Scenario, ScenarioError> {
    from_document(serde_json::from_str(text)?)
}

pub fn load_file(path: &Path) -> Result<Scenario, ScenarioError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        parse_json(&text)
    } else {
        parse_toml(&text)
    }
}

/// A built-in id, or a path to a scenario file.
pub fn resolve(spec: &str) -> Result<Scenario, ScenarioError> {
    if let Some(s) = builtin(spec) {
        return Ok(s);
    }
    let path = Path::new(spec);
    if path.exists() {
        load_file(path)
    } else {
        Err(ScenarioError::Unknown(spec.to_string()))
    }
}
