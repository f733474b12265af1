//! `harris-check`: hitting probabilities into an interval, observed
//! minorization mass under the transition kernel, and the theta / n_x
//! table from stationary-interval coverage.

use super::{Pipeline, RunContext};
use crate::error::PipelineError;
use rcar_core::regen::harris::{
    default_minorization_grids, estimate_theta_and_nx, hitting_probability, minorization_mass,
    HarrisCheckReport, ThetaNxOptions,
};
use rcar_core::regen::RegenError;
use rcar_core::rng::derive_root;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    /// Target interval `[c, d]`.
    interval: (f64, f64),
    #[serde(default = "default_x0_list")]
    x0_list: Vec<f64>,
    /// Horizon for each hitting trial.
    #[serde(default = "default_n_max")]
    n_max: usize,
    /// Trials per start value.
    #[serde(default = "default_trials")]
    trials: usize,
    /// Slack under the stationary coverage probability for the theta target.
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default)]
    theta_nx: ThetaNxOptions,
    #[serde(default = "default_x_points")]
    minorization_x_points: usize,
    #[serde(default = "default_y_points")]
    minorization_y_points: usize,
}

fn default_x0_list() -> Vec<f64> {
    vec![0.0, 10.0, 100.0]
}

fn default_n_max() -> usize {
    200
}

fn default_trials() -> usize {
    10_000
}

fn default_delta() -> f64 {
    0.01
}

fn default_x_points() -> usize {
    33
}

fn default_y_points() -> usize {
    201
}

pub struct HarrisCheck;

impl Pipeline for HarrisCheck {
    fn name(&self) -> &'static str {
        "harris-check"
    }

    fn summary(&self) -> &'static str {
        "Check the recurrence conditions numerically: hitting probabilities, minorization mass, theta/n_x"
    }

    fn run(&self, ctx: &RunContext) -> Result<(), PipelineError> {
        let p: Params = ctx.params()?;
        ctx.materialize(&p)?;
        let law = ctx.law()?;
        let mut notes = Vec::new();

        let mut hitting = Vec::with_capacity(p.x0_list.len());
        for (i, &x0) in p.x0_list.iter().enumerate() {
            hitting.push(hitting_probability(
                law.as_ref(),
                x0,
                p.interval,
                p.n_max,
                p.trials,
                derive_root(ctx.seed(), 100 + i as u64),
            )?);
        }

        let minorization = match default_minorization_grids(
            law.as_ref(),
            p.interval,
            p.minorization_x_points,
            p.minorization_y_points,
        )
        .and_then(|(xg, yg)| minorization_mass(law.as_ref(), &xg, &yg))
        {
            Ok(rep) => Some(rep),
            Err(RegenError::DensityUnavailable { kind }) => {
                notes.push(format!(
                    "law kind {kind} has no transition-density oracle; minorization mass skipped"
                ));
                None
            }
            Err(other) => return Err(other.into()),
        };

        let theta_nx = estimate_theta_and_nx(
            law.as_ref(),
            p.interval,
            &p.x0_list,
            p.delta,
            p.theta_nx,
            derive_root(ctx.seed(), 200),
        )?;

        let report =
            HarrisCheckReport { interval: p.interval, hitting, minorization, theta_nx };

        let mut w = ctx.open_csv("hitting.csv")?;
        w.write_record(["x0", "probability", "standard_error", "hits", "trials"])?;
        for h in &report.hitting {
            w.write_record([
                h.x0.to_string(),
                h.probability.to_string(),
                h.standard_error.to_string(),
                h.hits.to_string(),
                h.trials.to_string(),
            ])?;
        }
        w.flush()?;

        #[derive(Serialize)]
        struct Output<'a> {
            report: &'a HarrisCheckReport,
            notes: &'a [String],
        }
        ctx.write_json("harris_check.json", &Output { report: &report, notes: &notes })
    }
}
