//! `joint-cf`: the joint coefficient CF at one point via the conditional-CF
//! identity `psi(t1, t2) = phi_x(t2)` at `x = t1 / t2`, with an optional
//! direct Monte Carlo cross-check.

use super::{resolve_bandwidth, Pipeline, RunContext};
use crate::error::PipelineError;
use rcar_core::estimate::joint_cf_from_transition;
use rcar_core::process::simulate;
use rcar_core::rng::stream;
use rcar_core::stats::cis;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    n: usize,
    #[serde(default)]
    x0: f64,
    t1: f64,
    /// Must be nonzero: the identity reads the conditional CF at `t2`.
    t2: f64,
    h: Option<f64>,
    /// Also compute `E exp(i (t1 rho + t2 eps))` by direct sampling.
    #[serde(default = "yes")]
    mc_reference: bool,
}

fn yes() -> bool {
    true
}

pub struct JointCf;

impl Pipeline for JointCf {
    fn name(&self) -> &'static str {
        "joint-cf"
    }

    fn summary(&self) -> &'static str {
        "Evaluate the joint coefficient CF at one point through the conditional-CF identity"
    }

    fn run(&self, ctx: &RunContext) -> Result<(), PipelineError> {
        let mut p: Params = ctx.params()?;
        let law = ctx.law()?;
        let traj = simulate(law.as_ref(), p.x0, p.n, false, &mut stream(ctx.seed(), 0))?;
        let h = resolve_bandwidth(p.h, &traj.states)?;
        p.h = Some(h);
        ctx.materialize(&p)?;

        let est = joint_cf_from_transition(&traj, h, p.t1, p.t2)?;
        let mc = if p.mc_reference {
            let mut rng = stream(ctx.seed(), 1);
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for _ in 0..p.n {
                let (rho, eps) = law.sample_pair(&mut rng);
                acc += cis(p.t1 * rho + p.t2 * eps);
            }
            Some(acc / p.n as f64)
        } else {
            None
        };

        let mut w = ctx.open_csv("joint_cf.csv")?;
        w.write_record(["t1", "t2", "re", "im"])?;
        w.write_record([
            p.t1.to_string(),
            p.t2.to_string(),
            est.re.to_string(),
            est.im.to_string(),
        ])?;
        w.flush()?;

        #[derive(Serialize)]
        struct Meta {
            t1: f64,
            t2: f64,
            h: f64,
            estimate_re: f64,
            estimate_im: f64,
            mc_re: Option<f64>,
            mc_im: Option<f64>,
            abs_diff: Option<f64>,
        }
        ctx.write_json(
            "joint_cf.json",
            &Meta {
                t1: p.t1,
                t2: p.t2,
                h,
                estimate_re: est.re,
                estimate_im: est.im,
                mc_re: mc.map(|z| z.re),
                mc_im: mc.map(|z| z.im),
                abs_diff: mc.map(|z| (est - z).norm()),
            },
        )
    }
}
