//! `recover-cf`: noise CF from the bin at 0, coefficient CF from the ratio
//! at a probe bin, each over its own t-grid.

use super::{resolve_bandwidth, GridSpec, Pipeline, RunContext};
use crate::error::PipelineError;
use rcar_core::estimate::{default_x_probe, recover_eps_cf, recover_rho_cf, DEFAULT_CF_FLOOR};
use rcar_core::process::simulate;
use rcar_core::rng::stream;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    n: usize,
    #[serde(default)]
    x0: f64,
    h: Option<f64>,
    /// Probe state for the ratio; defaults to the upper-median magnitude
    /// of the visited states.
    x_probe: Option<f64>,
    #[serde(default = "default_eps_grid")]
    eps_t_grid: GridSpec,
    #[serde(default = "default_rho_grid")]
    rho_t_grid: GridSpec,
    /// Denominator-modulus floor below which ratio entries are invalid.
    #[serde(default = "default_floor")]
    floor: f64,
}

fn default_eps_grid() -> GridSpec {
    GridSpec { min: -3.0, max: 3.0, points: 61 }
}

fn default_rho_grid() -> GridSpec {
    GridSpec { min: -2.0, max: 2.0, points: 41 }
}

fn default_floor() -> f64 {
    DEFAULT_CF_FLOOR
}

pub struct RecoverCf;

impl Pipeline for RecoverCf {
    fn name(&self) -> &'static str {
        "recover-cf"
    }

    fn summary(&self) -> &'static str {
        "Recover the noise and coefficient characteristic functions from one trajectory"
    }

    fn run(&self, ctx: &RunContext) -> Result<(), PipelineError> {
        let mut p: Params = ctx.params()?;
        let eps_grid = p.eps_t_grid.build()?;
        let rho_grid = p.rho_t_grid.build()?;
        let law = ctx.law()?;
        let traj = simulate(law.as_ref(), p.x0, p.n, false, &mut stream(ctx.seed(), 0))?;
        let h = resolve_bandwidth(p.h, &traj.states)?;
        let x_probe = match p.x_probe {
            Some(v) if v.is_finite() && v != 0.0 => v,
            Some(v) => {
                return Err(PipelineError::Config(format!(
                    "x_probe must be finite and nonzero, got {v}"
                )))
            }
            None => default_x_probe(&traj.states)?,
        };
        p.h = Some(h);
        p.x_probe = Some(x_probe);
        ctx.materialize(&p)?;

        let eps = recover_eps_cf(&traj, h, &eps_grid)?;
        let rho = recover_rho_cf(&traj, h, x_probe, &rho_grid, p.floor)?;

        let mut w = ctx.open_csv("cf_eps.csv")?;
        w.write_record(["t", "re", "im"])?;
        for (t, z) in eps_grid.iter().zip(&eps.values) {
            w.write_record([t.to_string(), z.re.to_string(), z.im.to_string()])?;
        }
        w.flush()?;

        let mut w = ctx.open_csv("cf_rho.csv")?;
        w.write_record(["t", "re", "im", "valid"])?;
        for ((t, z), ok) in rho_grid.iter().zip(&rho.values).zip(&rho.valid) {
            w.write_record([t.to_string(), z.re.to_string(), z.im.to_string(), ok.to_string()])?;
        }
        w.flush()?;

        #[derive(Serialize)]
        struct Meta {
            h: f64,
            x_probe: f64,
            floor: f64,
            eps_bin_count: usize,
            probe_bin_count: usize,
            valid_entries: usize,
            total_entries: usize,
        }
        ctx.write_json(
            "recover_cf.json",
            &Meta {
                h,
                x_probe,
                floor: p.floor,
                eps_bin_count: eps.bin_count,
                probe_bin_count: rho.bin_count,
                valid_entries: rho.valid.iter().filter(|v| **v).count(),
                total_entries: rho.valid.len(),
            },
        )
    }
}
