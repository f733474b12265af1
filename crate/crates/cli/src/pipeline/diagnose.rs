//! `diagnose`: structural-hypothesis report for the configured law, plus
//! atom and convergence checks when the stationary limit exists. A law
//! failing the hypotheses is a successful diagnosis, not an error.

use super::{Pipeline, RunContext};
use crate::error::PipelineError;
use rcar_core::diagnostics::{
    atom_test, check_hypotheses, convergence_check, default_atom_resolutions, AtomTestReport,
    ConvergenceReport, HypothesisReport,
};
use rcar_core::numeric::ExtReal;
use rcar_core::process::{stationary_values, StationaryConfig};
use rcar_core::rng::derive_root;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    /// Stationary draws behind the atom test.
    #[serde(default = "default_atom_samples")]
    atom_samples: usize,
    #[serde(default = "default_m")]
    convergence_m: usize,
    #[serde(default = "default_n_list")]
    convergence_n_list: Vec<usize>,
    #[serde(default)]
    x0: f64,
}

fn default_atom_samples() -> usize {
    20_000
}

fn default_m() -> usize {
    2_000
}

fn default_n_list() -> Vec<usize> {
    vec![10, 50, 200]
}

fn fmt_ext(v: ExtReal) -> String {
    v.as_f64().to_string()
}

fn notes_for(rep: &HypothesisReport) -> Vec<String> {
    let mut notes = Vec::new();
    if rep.stationary_limit {
        notes.push(format!(
            "stationary-series hypotheses hold: E log|rho| = {} < 0 and E (log|eps|)^+ = {} < inf",
            fmt_ext(rep.log_moment_rho),
            fmt_ext(rep.log_plus_moment_eps)
        ));
    } else {
        if !rep.log_moment_rho.is_negative() {
            notes.push(format!(
                "stationary-series hypotheses fail: E log|rho| = {} (a negative value is required)",
                fmt_ext(rep.log_moment_rho)
            ));
        }
        if !rep.log_plus_moment_eps.is_finite() {
            notes.push(
                "stationary-series hypotheses fail: E (log|eps|)^+ is infinite".to_string(),
            );
        }
    }
    if rep.regenerative {
        notes.push(format!(
            "explicit-regeneration route applies: P(rho = 0) = {}",
            rep.prob_rho_zero
        ));
    }
    if rep.harris_recurrent {
        notes.push("recurrence-by-hitting route applies: P(rho = 0) = 0".to_string());
    }
    if rep.limit_non_atomic {
        notes.push("stationary law is atom-free (non-degenerate pair, no mass at rho = 0)".to_string());
    }
    if rep.pair_degenerate {
        notes.push("coefficient pair is almost surely constant; the stationary law is a point mass".to_string());
    }
    notes
}

pub struct Diagnose;

impl Pipeline for Diagnose {
    fn name(&self) -> &'static str {
        "diagnose"
    }

    fn summary(&self) -> &'static str {
        "Report which structural hypotheses the law satisfies, with atom and convergence checks"
    }

    fn run(&self, ctx: &RunContext) -> Result<(), PipelineError> {
        let p: Params = ctx.params()?;
        ctx.materialize(&p)?;
        let law = ctx.law()?;
        let hypotheses = check_hypotheses(law.as_ref());
        let notes = notes_for(&hypotheses);

        let (atom, convergence) = if hypotheses.stationary_limit {
            let samples = stationary_values(
                law.as_ref(),
                p.atom_samples,
                StationaryConfig::default(),
                derive_root(ctx.seed(), 0),
            )?;
            let atom = atom_test(&samples, &default_atom_resolutions(&samples))?;
            let convergence = convergence_check(
                law.as_ref(),
                &p.convergence_n_list,
                p.convergence_m,
                p.x0,
                derive_root(ctx.seed(), 1),
            )?;
            (Some(atom), Some(convergence))
        } else {
            (None, None)
        };

        #[derive(Serialize)]
        struct Output<'a> {
            hypotheses: &'a HypothesisReport,
            notes: &'a [String],
            atom: &'a Option<AtomTestReport>,
            convergence: &'a Option<ConvergenceReport>,
        }
        ctx.write_json(
            "diagnose.json",
            &Output { hypotheses: &hypotheses, notes: &notes, atom: &atom, convergence: &convergence },
        )
    }
}
