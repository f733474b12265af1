//! Cross-module agreement: simulation, analytic law queries, estimators,
//! regeneration accounting, and diagnostics must tell one coherent story.

use rcar_core::diagnostics::check_hypotheses;
use rcar_core::dist::{IndependentProduct, Normal, PointMass, Uniform, ZeroInflatedRho};
use rcar_core::estimate::{bandwidth_default, joint_cf_from_transition, transition_cdf_estimate};
use rcar_core::numeric::linspace;
use rcar_core::process::{simulate, stationary_values, StationarySampler};
use rcar_core::regen::decompose;
use rcar_core::rng::stream;
use rcar_core::stats::ks_two_sample;
use rcar_core::{CoefficientLaw, StationaryConfig};
use std::sync::Arc;

fn uniform_normal_law() -> IndependentProduct {
    IndependentProduct::new(
        Arc::new(Uniform::new(0.2, 0.8).unwrap()),
        Arc::new(Normal::new(0.0, 1.0).unwrap()),
    )
}

#[test]
fn time_average_agrees_with_stationary_ensemble() {
    // Ergodicity across modules: thinned tail of one long path vs
    // independent stationary draws.
    let law = uniform_normal_law();
    let traj = simulate(&law, 0.0, 120_000, false, &mut stream(91, 0)).unwrap();
    let thinned: Vec<f64> = traj.states[20_000..].iter().step_by(20).copied().collect();
    let ensemble = stationary_values(&law, 5_000, StationaryConfig::default(), 92).unwrap();
    let ks = ks_two_sample(&thinned, &ensemble);
    assert!(ks.statistic < 0.03, "D = {}", ks.statistic);
}

#[test]
fn estimated_transition_cdf_matches_analytic_kernel() {
    let law = uniform_normal_law();
    let traj = simulate(&law, 0.0, 200_000, false, &mut stream(93, 0)).unwrap();
    let h = bandwidth_default(&traj.states).unwrap();
    let x = 0.5;
    let y_grid = linspace(-3.0, 3.0, 121);
    let est = transition_cdf_estimate(&traj, x, h, &y_grid).unwrap();
    assert!(!est.empty_bin);
    let sup = y_grid
        .iter()
        .zip(&est.values)
        .map(|(&y, &v)| (v - law.transition_cdf(x, y).unwrap()).abs())
        .fold(0.0f64, f64::max);
    assert!(sup < 0.05, "sup diff = {sup}");
}

#[test]
fn estimated_joint_cf_matches_analytic_product() {
    let law = uniform_normal_law();
    let traj = simulate(&law, 0.0, 200_000, false, &mut stream(94, 0)).unwrap();
    let h = bandwidth_default(&traj.states).unwrap();
    let est = joint_cf_from_transition(&traj, h, 1.0, 1.0).unwrap();
    let exact = law.joint_cf(1.0, 1.0).unwrap();
    assert!((est - exact).norm() < 0.08, "diff = {}", (est - exact).norm());
}

#[test]
fn regenerative_diagnosis_and_cycle_accounting_agree() {
    let alpha = 0.2;
    let law = ZeroInflatedRho::new(
        alpha,
        Arc::new(Uniform::new(0.2, 0.8).unwrap()),
        Arc::new(Normal::new(0.0, 1.0).unwrap()),
    )
    .unwrap();
    let rep = check_hypotheses(&law);
    assert!(rep.regenerative && !rep.harris_recurrent);

    let traj = simulate(&law, 0.0, 100_000, true, &mut stream(95, 0)).unwrap();
    let decomp = decompose(&traj).unwrap();
    let lengths = decomp.cycle_lengths();
    let mean = lengths.iter().map(|&l| l as f64).sum::<f64>() / lengths.len() as f64;
    let sd = {
        let m = mean;
        (lengths.iter().map(|&l| (l as f64 - m).powi(2)).sum::<f64>()
            / (lengths.len() - 1) as f64)
            .sqrt()
    };
    let se = sd / (lengths.len() as f64).sqrt();
    assert!((mean - 1.0 / alpha).abs() < 3.0 * se, "mean {mean} vs {}", 1.0 / alpha);
}

#[test]
fn hypothesis_gate_matches_sampler_admission() {
    let good = uniform_normal_law();
    assert!(check_hypotheses(&good).stationary_limit);
    assert!(StationarySampler::new(&good, StationaryConfig::default()).is_ok());

    let bad = IndependentProduct::new(
        Arc::new(PointMass::new(1.1).unwrap()),
        Arc::new(Normal::new(0.0, 1.0).unwrap()),
    );
    assert!(!check_hypotheses(&bad).stationary_limit);
    assert!(StationarySampler::new(&bad, StationaryConfig::default()).is_err());
}
