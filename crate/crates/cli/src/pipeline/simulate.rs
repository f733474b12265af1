//! `simulate`: one driven trajectory, written as CSV and/or binary frame.

use super::{Pipeline, RunContext};
use crate::error::PipelineError;
use rcar_core::process::io::{save_frame, write_trajectory_csv};
use rcar_core::process::simulate;
use rcar_core::rng::stream;
use serde::{Deserialize, Serialize};
use std::fs::File;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    /// Number of steps after the starting point.
    n: usize,
    #[serde(default)]
    x0: f64,
    /// Keep the per-step `(rho, eps)` pairs in the outputs.
    #[serde(default = "yes")]
    retain_driving: bool,
    /// Substream index under the root seed.
    #[serde(default)]
    stream: u64,
    /// "csv", "frame", or "both".
    #[serde(default = "csv_format")]
    format: String,
}

fn yes() -> bool {
    true
}

fn csv_format() -> String {
    "csv".into()
}

pub struct Simulate;

impl Pipeline for Simulate {
    fn name(&self) -> &'static str {
        "simulate"
    }

    fn summary(&self) -> &'static str {
        "Generate one driven trajectory and write it as CSV and/or a binary frame"
    }

    fn run(&self, ctx: &RunContext) -> Result<(), PipelineError> {
        let p: Params = ctx.params()?;
        if !matches!(p.format.as_str(), "csv" | "frame" | "both") {
            return Err(PipelineError::Config(format!(
                "format must be csv, frame, or both, got {:?}",
                p.format
            )));
        }
        ctx.materialize(&p)?;
        let law = ctx.law()?;
        let mut rng = stream(ctx.seed(), p.stream);
        let traj = simulate(law.as_ref(), p.x0, p.n, p.retain_driving, &mut rng)?;
        if p.format == "csv" || p.format == "both" {
            let file = File::create(ctx.artifact_path("trajectory.csv"))?;
            write_trajectory_csv(file, &traj)?;
            ctx.note_artifact("trajectory.csv");
        }
        if p.format == "frame" || p.format == "both" {
            save_frame(ctx.artifact_path("trajectory.rcf"), &traj)?;
            ctx.note_artifact("trajectory.rcf");
        }
        Ok(())
    }
}
