//! Run manifest: everything needed to reproduce and audit a pipeline run.
//! Timing fields vary between runs; all other fields, and every CSV/JSON
//! artifact, are byte-stable for a fixed resolved config.

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub pipeline: String,
    /// SHA-256 of the canonical resolved config (seed, law, materialized
    /// params). Two runs with equal hashes produce identical artifacts.
    pub config_hash: String,
    pub root_seed: u64,
    /// Requested worker count, or "auto" for the library default. Worker
    /// count never changes artifact bytes.
    pub workers: String,
    pub versions: Versions,
    /// Unix seconds at launch; excluded from reproducibility comparisons.
    pub started_unix_s: u64,
    /// Excluded from reproducibility comparisons.
    pub wall_time_s: f64,
    /// The config with every default materialized; no run depends on
    /// implicit defaults.
    pub resolved_config: serde_json::Value,
    /// Artifact file names written by the pipeline, in write order.
    pub artifacts: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub rcar_core: &'static str,
    pub rcar_cli: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Self { rcar_core: rcar_core::VERSION, rcar_cli: env!("CARGO_PKG_VERSION") }
    }
}
