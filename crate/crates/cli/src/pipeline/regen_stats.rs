//! `regen-stats`: cycle decomposition at exact `rho = 0` times, geometric
//! cycle-length diagnostics, and the regeneration-value law check.

use super::{Pipeline, RunContext};
use crate::error::PipelineError;
use rcar_core::process::simulate;
use rcar_core::regen::{decompose, geometric_diagnostics, regeneration_value_check};
use rcar_core::rng::stream;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    n: usize,
    #[serde(default)]
    x0: f64,
}

pub struct RegenStats;

impl Pipeline for RegenStats {
    fn name(&self) -> &'static str {
        "regen-stats"
    }

    fn summary(&self) -> &'static str {
        "Decompose a trajectory into regeneration cycles and test them against Geometric(alpha)"
    }

    fn run(&self, ctx: &RunContext) -> Result<(), PipelineError> {
        let p: Params = ctx.params()?;
        ctx.materialize(&p)?;
        let law = ctx.law()?;
        let alpha = law.prob_rho_zero();
        if !(alpha > 0.0) {
            return Err(PipelineError::Precondition(
                "law puts no mass at rho = 0, so regeneration times never occur; \
                 use harris-check for the hitting-based route"
                    .into(),
            ));
        }
        let traj = simulate(law.as_ref(), p.x0, p.n, true, &mut stream(ctx.seed(), 0))?;
        let decomp = decompose(&traj)?;
        let geometric = geometric_diagnostics(&decomp, alpha)?;
        let values = regeneration_value_check(&decomp, &traj, law.as_ref())?;

        let mut w = ctx.open_csv("cycles.csv")?;
        w.write_record(["cycle", "length"])?;
        for (i, len) in decomp.cycle_lengths().iter().enumerate() {
            w.write_record([i.to_string(), len.to_string()])?;
        }
        w.flush()?;

        #[derive(Serialize)]
        struct Report<'a> {
            alpha: f64,
            regeneration_count: usize,
            geometric: &'a rcar_core::regen::GeometricReport,
            values: &'a rcar_core::regen::RegenValueReport,
        }
        ctx.write_json(
            "regen_stats.json",
            &Report {
                alpha,
                regeneration_count: decomp.tau.len(),
                geometric: &geometric,
                values: &values,
            },
        )
    }
}
