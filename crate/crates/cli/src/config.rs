//! Config envelope: versioned JSON with a mandatory root seed, a law node,
//! and pipeline-specific params; dotted-path overrides; canonical hashing.

use crate::error::PipelineError;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// The envelope every pipeline shares. `params` is interpreted by the
/// selected pipeline; unknown keys there fail at param-parse time.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Root seed; every random stream in the run derives from it.
    pub seed: u64,
    /// Coefficient-law node, resolved by the registry at pipeline start.
    pub law: Value,
    #[serde(default)]
    pub params: Map<String, Value>,
}

/// Loads a config file and applies dotted-path overrides before schema
/// validation, so overrides can both replace and add fields.
pub fn load_config(path: &Path, overrides: &[(String, Value)]) -> Result<RunConfig, PipelineError> {
    let text = fs::read_to_string(path)
        .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| PipelineError::Config(format!("{} is not valid JSON: {e}", path.display())))?;
    for (dotted, v) in overrides {
        set_path(&mut value, dotted, v.clone())?;
    }
    let config: RunConfig = serde_json::from_value(value)
        .map_err(|e| PipelineError::Config(format!("config schema: {e}")))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(PipelineError::Config(format!(
            "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
            config.schema_version
        )));
    }
    Ok(config)
}

/// Parses a `path.to.key=value` override. The value is JSON when it parses
/// as JSON (numbers, booleans, arrays, objects) and a plain string otherwise.
pub fn parse_override(s: &str) -> Result<(String, Value), PipelineError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| PipelineError::Config(format!("override {s:?} must look like path.to.key=value")))?;
    if k.is_empty() || k.split('.').any(str::is_empty) {
        return Err(PipelineError::Config(format!("override {s:?} has an empty path segment")));
    }
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

fn set_path(root: &mut Value, dotted: &str, v: Value) -> Result<(), PipelineError> {
    let parts: Vec<&str> = dotted.split('.').collect();
    let mut cur = root;
    for (i, part) in parts.iter().enumerate() {
        let map = cur.as_object_mut().ok_or_else(|| {
            PipelineError::Config(format!(
                "override path {dotted:?} crosses a non-object at {part:?}"
            ))
        })?;
        if i == parts.len() - 1 {
            map.insert(part.to_string(), v);
            return Ok(());
        }
        cur = map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("paths have at least one segment");
}

/// Rebuilds every object with keys in sorted order, making serialization
/// independent of insertion order.
pub fn canonicalize(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, val) in entries {
                out.insert(k, canonicalize(val));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        other => other,
    }
}

/// SHA-256 over the canonical serialization of the resolved config.
pub fn config_hash(resolved: &Value) -> Result<String, PipelineError> {
    let s = serde_json::to_string(resolved)
        .map_err(|e| PipelineError::Runtime(format!("serialize resolved config: {e}")))?;
    let mut h = Sha256::new();
    h.update(s.as_bytes());
    Ok(format!("sha256:{:x}", h.finalize()))
}
