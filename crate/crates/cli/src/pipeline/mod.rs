//! Pipeline trait and name-keyed registry. Each pipeline is a thin
//! composition of core-library operations; the registry selects one at
//! runtime by name, so configs and the CLI never hard-code dispatch.

pub mod diagnose;
pub mod estimate_cdf;
pub mod harris_check;
pub mod joint_cf;
pub mod recover_cf;
pub mod regen_stats;
pub mod simulate;

use crate::config::{canonicalize, config_hash, RunConfig, SCHEMA_VERSION};
use crate::error::PipelineError;
use crate::manifest::{Manifest, Versions};
use rcar_core::dist::build_law;
use rcar_core::numeric::linspace;
use rcar_core::CoefficientLaw;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub trait Pipeline: Sync {
    fn name(&self) -> &'static str;
    /// One-line description for listings.
    fn summary(&self) -> &'static str;
    fn run(&self, ctx: &RunContext) -> Result<(), PipelineError>;
}

/// Shared run state: the config, the output directory, and the artifact
/// ledger the manifest is written from.
pub struct RunContext {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
    artifacts: RefCell<Vec<String>>,
    resolved_params: RefCell<Option<Value>>,
    started: Instant,
    started_unix_s: u64,
}

impl RunContext {
    pub fn new(
        config: RunConfig,
        out_dir: PathBuf,
        workers: Option<usize>,
    ) -> Result<Self, PipelineError> {
        fs::create_dir_all(&out_dir)
            .map_err(|e| PipelineError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
        let started_unix_s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(Self {
            config,
            out_dir,
            workers,
            artifacts: RefCell::new(Vec::new()),
            resolved_params: RefCell::new(None),
            started: Instant::now(),
            started_unix_s,
        })
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    /// Parses this pipeline's params block, rejecting unknown fields.
    pub fn params<T: DeserializeOwned>(&self) -> Result<T, PipelineError> {
        serde_json::from_value(Value::Object(self.config.params.clone()))
            .map_err(|e| PipelineError::Config(format!("params: {e}")))
    }

    /// Builds the coefficient law named by the config.
    pub fn law(&self) -> Result<Arc<dyn CoefficientLaw>, PipelineError> {
        build_law(&self.config.law).map_err(|e| PipelineError::Config(format!("law: {e}")))
    }

    /// Records the fully materialized params; the manifest and the config
    /// hash cover exactly these values, so no run depends on implicit
    /// defaults. Every pipeline must call this once, after resolving
    /// data-driven defaults.
    pub fn materialize<T: Serialize>(&self, params: &T) -> Result<(), PipelineError> {
        let v = serde_json::to_value(params)
            .map_err(|e| PipelineError::Runtime(format!("serialize params: {e}")))?;
        *self.resolved_params.borrow_mut() = Some(v);
        Ok(())
    }

    pub fn artifact_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Registers a file written by means other than the helpers below.
    pub fn note_artifact(&self, name: &str) {
        self.artifacts.borrow_mut().push(name.to_string());
    }

    pub fn open_csv(&self, name: &str) -> Result<csv::Writer<fs::File>, PipelineError> {
        let path = self.artifact_path(name);
        let file = fs::File::create(&path)
            .map_err(|e| PipelineError::Runtime(format!("cannot create {}: {e}", path.display())))?;
        self.note_artifact(name);
        Ok(csv::Writer::from_writer(file))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), PipelineError> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| PipelineError::Runtime(format!("serialize {name}: {e}")))?;
        fs::write(self.artifact_path(name), text + "\n")?;
        self.note_artifact(name);
        Ok(())
    }

    /// Writes `manifest.json`. Called by the registry after a successful run.
    fn finish(&self, pipeline: &'static str) -> Result<(), PipelineError> {
        let params = self
            .resolved_params
            .borrow()
            .clone()
            .ok_or_else(|| {
                PipelineError::Runtime(format!("pipeline {pipeline} never materialized its params"))
            })?;
        let resolved = canonicalize(serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "seed": self.config.seed,
            "law": self.config.law,
            "params": params,
        }));
        let manifest = Manifest {
            pipeline: pipeline.to_string(),
            config_hash: config_hash(&resolved)?,
            root_seed: self.config.seed,
            workers: self.workers.map_or_else(|| "auto".to_string(), |w| w.to_string()),
            versions: Versions::current(),
            started_unix_s: self.started_unix_s,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            resolved_config: resolved,
            artifacts: self.artifacts.borrow().clone(),
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| PipelineError::Runtime(format!("serialize manifest: {e}")))?;
        fs::write(self.artifact_path("manifest.json"), text + "\n")?;
        Ok(())
    }
}

/// Name-keyed pipeline registry.
pub struct PipelineRegistry {
    entries: BTreeMap<&'static str, Box<dyn Pipeline>>,
}

impl PipelineRegistry {
    pub fn standard() -> Self {
        let mut r = Self { entries: BTreeMap::new() };
        r.register(Box::new(simulate::Simulate));
        r.register(Box::new(regen_stats::RegenStats));
        r.register(Box::new(harris_check::HarrisCheck));
        r.register(Box::new(estimate_cdf::EstimateCdf));
        r.register(Box::new(recover_cf::RecoverCf));
        r.register(Box::new(joint_cf::JointCf));
        r.register(Box::new(diagnose::Diagnose));
        r
    }

    pub fn register(&mut self, p: Box<dyn Pipeline>) {
        self.entries.insert(p.name(), p);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Pipeline> {
        self.entries.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    /// Runs the named pipeline and, on success, writes the manifest.
    pub fn run(&self, name: &str, ctx: &RunContext) -> Result<(), PipelineError> {
        let p = self.get(name).ok_or_else(|| {
            PipelineError::Config(format!(
                "unknown pipeline {name:?}; available: {}",
                self.names().join(", ")
            ))
        })?;
        p.run(ctx)?;
        ctx.finish(p.name())
    }
}

/// Inclusive evenly spaced grid description used by several pipelines.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Vec<f64>, PipelineError> {
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() || self.points < 2
        {
            return Err(PipelineError::Config(format!(
                "grid needs finite min < max and at least 2 points, got {self:?}"
            )));
        }
        Ok(linspace(self.min, self.max, self.points))
    }
}

/// Resolves an optional configured bandwidth: validates a given value, or
/// falls back to the data-driven default.
pub(crate) fn resolve_bandwidth(h: Option<f64>, states: &[f64]) -> Result<f64, PipelineError> {
    match h {
        Some(v) if v.is_finite() && v > 0.0 => Ok(v),
        Some(v) => Err(PipelineError::Config(format!("h must be positive and finite, got {v}"))),
        None => Ok(rcar_core::estimate::bandwidth_default(states)?),
    }
}
