//! Law screening and distribution-level diagnostics: which structural
//! hypotheses a coefficient law satisfies, whether a sample shows atoms,
//! and whether the chain law approaches the stationary law.

use crate::dist::CoefficientLaw;
use crate::numeric::ExtReal;
use crate::process::{self, SimError, StationaryConfig};
use crate::rng::derive_root;
use crate::stats;
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

/// Minimum sample size for the atom test; below this the bin-occupancy
/// curve is noise.
pub const MIN_ATOM_SAMPLES: usize = 10_000;

/// Minimum ensemble size for the convergence check, keeping the asymptotic
/// KS critical values applicable.
pub const MIN_KS_SAMPLES: usize = 1_000;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("need at least {required} samples, got {found}")]
    TooFewSamples { found: usize, required: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Structural hypotheses of a law, with the measured quantities behind
/// each verdict.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub kind: &'static str,
    pub log_moment_rho: ExtReal,
    pub log_plus_moment_eps: ExtReal,
    pub prob_rho_zero: f64,
    pub pair_degenerate: bool,
    /// The stationary series converges: `E log|rho| < 0` (possibly `-inf`)
    /// and `E (log|eps|)^+ < inf`.
    pub stationary_limit: bool,
    /// The stationary law has no atoms: convergence, no mass at `rho = 0`,
    /// and a non-degenerate pair (pair not almost surely one fixed point).
    pub limit_non_atomic: bool,
    /// The recurrence-by-hitting route applies: convergence plus
    /// `P(rho = 0) = 0`.
    pub harris_recurrent: bool,
    /// The explicit-cycle route applies: convergence plus `P(rho = 0) > 0`.
    pub regenerative: bool,
}

/// Evaluates the structural hypotheses for a law. Diagnosis never fails:
/// a law satisfying nothing simply reports all verdicts false.
pub fn check_hypotheses(law: &dyn CoefficientLaw) -> HypothesisReport {
    let log_rho = law.log_moment_rho();
    let log_eps_plus = law.log_plus_moment_eps();
    let alpha = law.prob_rho_zero();
    let degenerate = law.pair_degenerate();
    let stationary = log_rho.is_negative() && log_eps_plus.is_finite();
    HypothesisReport {
        kind: law.kind(),
        log_moment_rho: log_rho,
        log_plus_moment_eps: log_eps_plus,
        prob_rho_zero: alpha,
        pair_degenerate: degenerate,
        stationary_limit: stationary,
        limit_non_atomic: stationary && alpha == 0.0 && !degenerate,
        harris_recurrent: stationary && alpha == 0.0,
        regenerative: stationary && alpha > 0.0,
    }
}

/// Bin-occupancy curve over dyadic resolutions, with an atomicity verdict.
#[derive(Debug, Clone, Serialize)]
pub struct AtomTestReport {
    /// `(delta, max single-bin fraction)`, coarsest resolution first.
    pub curve: Vec<(f64, f64)>,
    /// Density-scale fit `max_fraction / delta` at the coarsest resolution.
    pub kappa: f64,
    /// `10 kappa delta` at the finest resolution: what a density-bounded
    /// sample must stay under.
    pub threshold_at_finest: f64,
    pub max_fraction_at_finest: f64,
    /// The finest-resolution occupancy failed to shrink linearly.
    pub atomic: bool,
}

/// Occupancy of half-open width-`delta` bins anchored at 0, for a ladder of
/// dyadic resolutions. A non-atomic law with bounded density puts at most
/// about `density_sup * delta` mass in any bin, so the max fraction must
/// shrink linearly as `delta` drops; an atom pins it away from zero. Bins
/// nest exactly across the ladder (fine keys are integer-shifted into
/// coarse keys), so the curve is monotone by construction, not just
/// statistically.
///
/// `resolutions` must be at least two distinct positive values, each an
/// exact power-of-two multiple of the smallest.
pub fn atom_test(samples: &[f64], resolutions: &[f64]) -> Result<AtomTestReport, DiagnosticsError> {
    if samples.len() < MIN_ATOM_SAMPLES {
        return Err(DiagnosticsError::TooFewSamples {
            found: samples.len(),
            required: MIN_ATOM_SAMPLES,
        });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(DiagnosticsError::InvalidParameter("samples must be finite".into()));
    }
    let mut deltas = resolutions.to_vec();
    if deltas.len() < 2 || deltas.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
        return Err(DiagnosticsError::InvalidParameter(
            "need at least two positive finite resolutions".into(),
        ));
    }
    deltas.sort_by(|a, b| b.total_cmp(a));
    if deltas.windows(2).any(|w| w[0] == w[1]) {
        return Err(DiagnosticsError::InvalidParameter("resolutions must be distinct".into()));
    }
    let d_min = *deltas.last().expect("checked nonempty");
    let shifts: Vec<u32> = deltas
        .iter()
        .map(|&d| {
            let ratio = d / d_min;
            let shift = ratio.log2().round() as u32;
            if shift > 62 || (1u64 << shift) as f64 != ratio {
                return Err(DiagnosticsError::InvalidParameter(format!(
                    "resolution {d} is not an exact dyadic multiple of the finest ({d_min})"
                )));
            }
            Ok(shift)
        })
        .collect::<Result<_, _>>()?;
    let max_abs = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max_abs / d_min >= 4.0e18 {
        return Err(DiagnosticsError::InvalidParameter(
            "finest resolution too small for the sample range (bin index overflow)".into(),
        ));
    }

    // Keys at the finest resolution; coarser bins are exact unions of fine
    // bins via arithmetic (floor-division) right shifts.
    let mut fine: HashMap<i64, u64> = HashMap::new();
    for &x in samples {
        *fine.entry((x / d_min).floor() as i64).or_insert(0) += 1;
    }
    let n = samples.len() as f64;
    let mut curve = Vec::with_capacity(deltas.len());
    for (&d, &shift) in deltas.iter().zip(&shifts) {
        let mut coarse: HashMap<i64, u64> = HashMap::new();
        for (&k, &c) in &fine {
            *coarse.entry(k >> shift).or_insert(0) += c;
        }
        let max_count = coarse.values().copied().max().expect("nonempty");
        curve.push((d, max_count as f64 / n));
    }
    debug_assert!(curve.windows(2).all(|w| w[0].1 >= w[1].1), "nesting must be exact");

    let (d_max, frac_max) = curve[0];
    let kappa = frac_max / d_max;
    let (_, frac_min) = *curve.last().expect("nonempty");
    let threshold = 10.0 * kappa * d_min;
    Ok(AtomTestReport {
        curve,
        kappa,
        threshold_at_finest: threshold,
        max_fraction_at_finest: frac_min,
        atomic: frac_min >= threshold,
    })
}

/// Default dyadic ladder for [`atom_test`]: `range / 2^k` for
/// `k = 4, 6, 8, 10`. A degenerate sample (zero range) falls back to a
/// unit base span so the all-in-one-bin signature is still visible.
pub fn default_atom_resolutions(samples: &[f64]) -> Vec<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in samples {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let range = if hi > lo { hi - lo } else { 1.0 };
    [4u32, 6, 8, 10].iter().map(|&k| range / (1u64 << k) as f64).collect()
}

/// One horizon of the convergence check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceEntry {
    pub n: usize,
    pub ks_statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub m: usize,
    pub x0: f64,
    /// Aligned to the requested horizons, ascending.
    pub entries: Vec<ConvergenceEntry>,
    /// `2 x` the asymptotic KS critical value at level 0.01 for `m` points.
    pub threshold: f64,
    /// Final distance under the threshold.
    pub converged: bool,
    /// Distances nonincreasing, allowing the same slack.
    pub monotone_within_noise: bool,
}

/// Two-sample KS distances between `m` terminal values at each horizon in
/// `n_list` (independent chains from `x0`) and `m` stationary draws. The
/// convergence hypotheses are validated by the stationary sampler; failure
/// there is a hard error.
pub fn convergence_check(
    law: &dyn CoefficientLaw,
    n_list: &[usize],
    m: usize,
    x0: f64,
    root_seed: u64,
) -> Result<ConvergenceReport, DiagnosticsError> {
    if m < MIN_KS_SAMPLES {
        return Err(DiagnosticsError::TooFewSamples { found: m, required: MIN_KS_SAMPLES });
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(DiagnosticsError::InvalidParameter(
            "n_list must be nonempty, strictly increasing, and positive".into(),
        ));
    }
    let stationary =
        process::stationary_values(law, m, StationaryConfig::default(), derive_root(root_seed, 0))?;
    let mut entries = Vec::with_capacity(n_list.len());
    for (j, &n) in n_list.iter().enumerate() {
        let terminal = process::terminal_values(law, m, n, x0, derive_root(root_seed, 1 + j as u64))?;
        let ks = stats::ks_two_sample(&terminal, &stationary);
        entries.push(ConvergenceEntry { n, ks_statistic: ks.statistic, p_value: ks.p_value });
    }
    let threshold = 2.0 * stats::ks_critical(m as f64, 0.01);
    let converged = entries.last().expect("nonempty").ks_statistic < threshold;
    let monotone = entries
        .windows(2)
        .all(|w| w[1].ks_statistic <= w[0].ks_statistic + threshold);
    Ok(ConvergenceReport {
        m,
        x0,
        entries,
        threshold,
        converged,
        monotone_within_noise: monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{
        DiscreteJoint, IndependentProduct, JointAtom, Marginal, Normal, PointMass, Uniform,
        ZeroInflatedRho,
    };
    use crate::rng::stream;
    use std::sync::Arc;

    fn uniform_normal_law() -> IndependentProduct {
        IndependentProduct::new(
            Arc::new(Uniform::new(0.2, 0.8).unwrap()),
            Arc::new(Normal::new(0.0, 1.0).unwrap()),
        )
    }

    fn example_two() -> IndependentProduct {
        IndependentProduct::new(
            Arc::new(Uniform::new(0.2, 0.8).unwrap()),
            Arc::new(Uniform::new(-1.0, 1.0).unwrap()),
        )
    }

    #[test]
    fn contracting_continuous_law_passes_all_static_routes() {
        let rep = check_hypotheses(&uniform_normal_law());
        assert!(rep.stationary_limit);
        assert!(rep.harris_recurrent);
        assert!(rep.limit_non_atomic);
        assert!(!rep.regenerative);
        assert!((rep.log_moment_rho.as_f64() - (-0.7610454309409128)).abs() < 1e-9);
    }

    #[test]
    fn zero_atom_law_is_regenerative_not_harris() {
        let law = ZeroInflatedRho::new(
            0.3,
            Arc::new(Uniform::new(0.2, 0.8).unwrap()),
            Arc::new(Normal::new(0.0, 1.0).unwrap()),
        )
        .unwrap();
        let rep = check_hypotheses(&law);
        assert!(rep.stationary_limit);
        assert!(rep.regenerative);
        assert!(!rep.harris_recurrent);
        assert!(!rep.limit_non_atomic);
        assert_eq!(rep.log_moment_rho, ExtReal::NegInf);
        assert_eq!(rep.prob_rho_zero, 0.3);
    }

    #[test]
    fn expanding_coefficient_fails_everything() {
        let law = IndependentProduct::new(
            Arc::new(PointMass::new(1.5).unwrap()),
            Arc::new(Normal::new(0.0, 1.0).unwrap()),
        );
        let rep = check_hypotheses(&law);
        assert!(!rep.stationary_limit);
        assert!(!rep.harris_recurrent && !rep.regenerative && !rep.limit_non_atomic);
        assert!((rep.log_moment_rho.as_f64() - 1.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_pair_blocks_non_atomicity_only() {
        let law = IndependentProduct::new(
            Arc::new(PointMass::new(0.5).unwrap()),
            Arc::new(PointMass::new(1.0).unwrap()),
        );
        let rep = check_hypotheses(&law);
        assert!(rep.stationary_limit);
        assert!(rep.harris_recurrent);
        assert!(!rep.limit_non_atomic);
        assert!(rep.pair_degenerate);
    }

    #[test]
    fn constant_sample_is_atomic() {
        let samples = vec![3.0; MIN_ATOM_SAMPLES];
        let res = default_atom_resolutions(&samples);
        let rep = atom_test(&samples, &res).unwrap();
        assert!(rep.curve.iter().all(|&(_, f)| f == 1.0));
        assert!(rep.atomic);
    }

    #[test]
    fn gaussian_occupancy_tracks_density_times_delta() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut rng = stream(61, 0);
        let samples: Vec<f64> = (0..100_000).map(|_| normal.sample(&mut rng)).collect();
        let rep = atom_test(&samples, &[0.64, 0.01]).unwrap();
        // Peak bin fraction at delta = 0.01 is about phi(0) * 0.01.
        let peak = rep.max_fraction_at_finest;
        assert!(peak > 0.003 && peak < 0.006, "peak {peak}");
        assert!(!rep.atomic);
    }

    #[test]
    fn occupancy_curve_is_monotone_across_the_ladder() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut rng = stream(62, 0);
        let samples: Vec<f64> = (0..20_000).map(|_| normal.sample(&mut rng)).collect();
        let rep = atom_test(&samples, &default_atom_resolutions(&samples)).unwrap();
        assert!(rep.curve.windows(2).all(|w| w[0].1 >= w[1].1), "curve {:?}", rep.curve);
    }

    #[test]
    fn continuous_stationary_law_is_not_flagged() {
        let law = uniform_normal_law();
        let samples =
            process::stationary_values(&law, 20_000, StationaryConfig::default(), 63).unwrap();
        let rep = atom_test(&samples, &default_atom_resolutions(&samples)).unwrap();
        assert!(!rep.atomic, "curve {:?}", rep.curve);
    }

    #[test]
    fn discrete_stationary_law_is_flagged_at_fine_resolution() {
        // Atom at rho = 0 makes the stationary law purely discrete; the
        // occupancy stays pinned down to delta = 1e-6.
        let law = DiscreteJoint::new(vec![
            JointAtom { rho_value: 0.0, eps_value: 1.0, probability: 0.5 },
            JointAtom { rho_value: 0.5, eps_value: 1.0, probability: 0.5 },
        ])
        .unwrap();
        let samples =
            process::stationary_values(&law, 20_000, StationaryConfig::default(), 64).unwrap();
        let rep = atom_test(&samples, &[1.024e-3, 1e-6]).unwrap();
        assert!(rep.atomic, "curve {:?}", rep.curve);
        assert!(rep.max_fraction_at_finest > 0.3);
    }

    #[test]
    fn non_dyadic_ladder_is_rejected() {
        let samples = vec![0.0; MIN_ATOM_SAMPLES];
        match atom_test(&samples, &[0.3, 0.1]) {
            Err(DiagnosticsError::InvalidParameter(msg)) => {
                assert!(msg.contains("dyadic"), "{msg}")
            }
            other => panic!("expected InvalidParameter, got {other:?}"),
        }
    }

    #[test]
    fn too_few_samples_for_atom_test() {
        let samples = vec![0.0; 100];
        assert!(matches!(
            atom_test(&samples, &[0.4, 0.1]),
            Err(DiagnosticsError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn memoryless_law_converges_immediately() {
        let law = IndependentProduct::new(
            Arc::new(PointMass::new(0.0).unwrap()),
            Arc::new(Normal::new(0.0, 1.0).unwrap()),
        );
        let rep = convergence_check(&law, &[1, 5], 4_000, 50.0, 65).unwrap();
        assert!(rep.converged);
        assert!(rep.entries[0].ks_statistic < rep.threshold);
        assert!(rep.entries[0].p_value > 0.01);
    }

    #[test]
    fn bounded_noise_law_converges_along_horizons() {
        let rep = convergence_check(&example_two(), &[5, 20, 100], 10_000, 3.0, 66).unwrap();
        assert!(rep.converged);
        assert!(rep.monotone_within_noise);
        let last = rep.entries.last().unwrap();
        assert!(last.ks_statistic < 0.02, "final D = {}", last.ks_statistic);
    }

    #[test]
    fn start_value_is_forgotten() {
        // Terminal ensembles from x0 = 1000 and x0 = 0 agree at n = 200.
        let law = uniform_normal_law();
        let a = process::terminal_values(&law, 10_000, 200, 1_000.0, 67).unwrap();
        let b = process::terminal_values(&law, 10_000, 200, 0.0, 68).unwrap();
        let ks = stats::ks_two_sample(&a, &b);
        assert!(ks.statistic < 0.02, "D = {}", ks.statistic);
    }

    #[test]
    fn verdict_is_stable_across_root_seeds() {
        // Pass/fail flakiness budget over 20 seeds: at most one failure.
        let law = example_two();
        let mut passes = 0;
        for seed in 0..20 {
            let rep = convergence_check(&law, &[10, 50], 2_000, 3.0, seed).unwrap();
            if rep.converged {
                passes += 1;
            }
        }
        assert!(passes >= 19, "converged {passes}/20");
    }

    #[test]
    fn non_contracting_law_is_a_hard_error() {
        let law = IndependentProduct::new(
            Arc::new(PointMass::new(1.5).unwrap()),
            Arc::new(Normal::new(0.0, 1.0).unwrap()),
        );
        match convergence_check(&law, &[5], 2_000, 0.0, 69) {
            Err(DiagnosticsError::Sim(SimError::PreconditionViolated(_))) => {}
            other => panic!("expected precondition failure, got {other:?}"),
        }
    }

    #[test]
    fn small_ensembles_are_rejected() {
        assert!(matches!(
            convergence_check(&uniform_normal_law(), &[5], 100, 0.0, 70),
            Err(DiagnosticsError::TooFewSamples { .. })
        ));
    }
}
