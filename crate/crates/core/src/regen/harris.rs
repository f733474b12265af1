//! Numerical checks for the recurrence route that needs no atom at zero:
//! hitting probabilities for a target interval, a grid lower bound on the
//! one-step minorization mass, and the theta / n_x construction behind the
//! hitting argument.

use super::RegenError;
use crate::dist::CoefficientLaw;
use crate::numeric::linspace;
use crate::process::{self, StationaryConfig};
use crate::rng::{derive_root, stream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Monte Carlo estimate of `P(X_n hits [c, d] for some n <= n_max | X_0)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HittingEstimate {
    pub x0: f64,
    pub probability: f64,
    /// Binomial standard error `sqrt(p (1 - p) / trials)`.
    pub standard_error: f64,
    pub hits: usize,
    pub trials: usize,
    pub n_max: usize,
}

/// Estimates the hitting probability of the closed interval `[c, d]` within
/// `n_max` steps, over independent seeded trials. A trial whose state
/// overflows to a non-finite value counts as a miss (it has left every
/// bounded interval for good).
pub fn hitting_probability(
    law: &dyn CoefficientLaw,
    x0: f64,
    interval: (f64, f64),
    n_max: usize,
    trials: usize,
    root_seed: u64,
) -> Result<HittingEstimate, RegenError> {
    let (c, d) = interval;
    if !(c < d) || !c.is_finite() || !d.is_finite() {
        return Err(RegenError::InvalidParameter(format!(
            "interval must satisfy c < d with both finite, got ({c}, {d})"
        )));
    }
    if trials == 0 || n_max == 0 {
        return Err(RegenError::InvalidParameter(
            "hitting_probability requires trials >= 1 and n_max >= 1".into(),
        ));
    }
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(root_seed, k as u64);
            let mut x = x0;
            for _ in 0..n_max {
                let (rho, eps) = law.sample_pair(&mut rng);
                x = process::step(x, rho, eps);
                if !x.is_finite() {
                    return 0usize;
                }
                if c <= x && x <= d {
                    return 1;
                }
            }
            0
        })
        .sum();
    let p = hits as f64 / trials as f64;
    Ok(HittingEstimate {
        x0,
        probability: p,
        standard_error: (p * (1.0 - p) / trials as f64).sqrt(),
        hits,
        trials,
        n_max,
    })
}

/// Grid lower bound for the achievable one-step minorization mass.
#[derive(Debug, Clone, Serialize)]
pub struct MinorizationReport {
    pub interval: (f64, f64),
    /// Trapezoid integral over `y_grid` of `min_x density(x, y)`.
    pub mass: f64,
    pub y_grid: Vec<f64>,
    /// `min` over the x-grid of the transition density, aligned to `y_grid`.
    pub min_density: Vec<f64>,
    pub x_points: usize,
}

/// Computes `m(y) = min_{x in x_grid} density(rho x + eps at y)` and its
/// trapezoid integral over `y_grid`. A strictly positive mass certifies
/// (numerically, on the grids) that a uniform component exists under the
/// kernel over the interval; it is an observed lower bound, not a proof.
pub fn minorization_mass(
    law: &dyn CoefficientLaw,
    x_grid: &[f64],
    y_grid: &[f64],
) -> Result<MinorizationReport, RegenError> {
    if x_grid.is_empty() || y_grid.len() < 2 {
        return Err(RegenError::InvalidParameter(
            "minorization needs a nonempty x-grid and >= 2 y-points".into(),
        ));
    }
    if y_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RegenError::InvalidParameter("y-grid must be strictly increasing".into()));
    }
    let density = |x: f64, y: f64| {
        law.transition_density(x, y)
            .ok_or(RegenError::DensityUnavailable { kind: law.kind() })
    };
    let mut min_density = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        let mut m = f64::INFINITY;
        for &x in x_grid {
            m = m.min(density(x, y)?);
        }
        min_density.push(m);
    }
    let mass: f64 = y_grid
        .windows(2)
        .zip(min_density.windows(2))
        .map(|(ys, ms)| 0.5 * (ms[0] + ms[1]) * (ys[1] - ys[0]))
        .sum();
    let (lo, hi) = (x_grid[0], x_grid[x_grid.len() - 1]);
    Ok(MinorizationReport {
        interval: (lo, hi),
        mass,
        y_grid: y_grid.to_vec(),
        min_density,
        x_points: x_grid.len(),
    })
}

/// Default grids for [`minorization_mass`]: `x_points` across the interval
/// and `y_points` across a span holding at least 99.9% of the one-step
/// transition mass from every start in the interval. For each fixed `rho`
/// the tail probability is monotone in `x`, so checking the two interval
/// endpoints at the 0.05% level bounds every interior start at 0.1%.
pub fn default_minorization_grids(
    law: &dyn CoefficientLaw,
    interval: (f64, f64),
    x_points: usize,
    y_points: usize,
) -> Result<(Vec<f64>, Vec<f64>), RegenError> {
    let (c, d) = interval;
    if !(c < d) || !c.is_finite() || !d.is_finite() {
        return Err(RegenError::InvalidParameter(format!(
            "interval must satisfy c < d with both finite, got ({c}, {d})"
        )));
    }
    if x_points < 2 || y_points < 2 {
        return Err(RegenError::InvalidParameter("grids need at least 2 points".into()));
    }
    let cdf = |x: f64, y: f64| {
        law.transition_cdf(x, y)
            .ok_or(RegenError::DensityUnavailable { kind: law.kind() })
    };
    let mut span = law.eps_scale().max(1e-6) + c.abs().max(d.abs());
    for _ in 0..64 {
        let tail = 5e-4;
        let covered = cdf(c, -span)? <= tail
            && cdf(d, -span)? <= tail
            && cdf(c, span)? >= 1.0 - tail
            && cdf(d, span)? >= 1.0 - tail;
        if covered {
            break;
        }
        span *= 2.0;
    }
    Ok((linspace(c, d, x_points), linspace(-span, span, y_points)))
}

/// Tuning for [`estimate_theta_and_nx`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ThetaNxOptions {
    /// Chains advanced per start value.
    pub trials: usize,
    /// Largest step index examined before giving up on a start value.
    pub cap: usize,
    /// Stationary draws behind the target probability.
    pub stationary_samples: usize,
}

impl Default for ThetaNxOptions {
    fn default() -> Self {
        Self { trials: 2_000, cap: 500, stationary_samples: 20_000 }
    }
}

/// One start value's result.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThetaNxEntry {
    pub x0: f64,
    /// Smallest examined `n` with estimated `P(X_n in [c,d] | X_0) > theta`;
    /// `None` when the cap was reached first (reported, not fatal).
    pub n_x: Option<usize>,
    /// The estimate at `n_x`, or at the cap when `n_x` is `None`.
    pub probability: f64,
}

/// The theta / n_x table for a set of start values.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaNxReport {
    pub interval: (f64, f64),
    /// Symmetric shrink margin; both margins equal `(d - c) / 8`.
    pub eta: f64,
    /// `[c + 2 eta, d - 2 eta]`, the interval behind the target.
    pub shrunk: (f64, f64),
    /// Monte Carlo `P(X_inf in shrunk)`.
    pub stationary_prob: f64,
    pub delta: f64,
    /// Target `theta = stationary_prob - delta`.
    pub theta: f64,
    pub options: ThetaNxOptions,
    pub entries: Vec<ThetaNxEntry>,
}

/// For each start value, finds the smallest `n <= cap` whose estimated
/// occupation probability of `[c, d]` exceeds the target
/// `theta = P(X_inf in [c + 2 eta, d - 2 eta]) - delta` with
/// `eta = (d - c) / 8`: the largest symmetric margin keeping the shrunk
/// interval nonempty with room to spare. A non-positive target is exceeded
/// immediately, so those runs report `n_x = 1`.
pub fn estimate_theta_and_nx(
    law: &dyn CoefficientLaw,
    interval: (f64, f64),
    x0_list: &[f64],
    delta: f64,
    options: ThetaNxOptions,
    root_seed: u64,
) -> Result<ThetaNxReport, RegenError> {
    let (c, d) = interval;
    if !(c < d) || !c.is_finite() || !d.is_finite() {
        return Err(RegenError::InvalidParameter(format!(
            "interval must satisfy c < d with both finite, got ({c}, {d})"
        )));
    }
    if !(delta > 0.0) {
        return Err(RegenError::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if options.trials == 0 || options.cap == 0 || options.stationary_samples == 0 {
        return Err(RegenError::InvalidParameter(
            "trials, cap, and stationary_samples must all be >= 1".into(),
        ));
    }
    let eta = (d - c) / 8.0;
    let shrunk = (c + 2.0 * eta, d - 2.0 * eta);
    // Hypothesis validation happens inside the stationary sampler.
    let stationary = process::stationary_values(
        law,
        options.stationary_samples,
        StationaryConfig::default(),
        derive_root(root_seed, 0),
    )?;
    let inside = stationary.iter().filter(|&&v| shrunk.0 <= v && v <= shrunk.1).count();
    let stationary_prob = inside as f64 / stationary.len() as f64;
    let theta = stationary_prob - delta;

    let mut entries = Vec::with_capacity(x0_list.len());
    for (idx, &x0) in x0_list.iter().enumerate() {
        let root = derive_root(root_seed, 1 + idx as u64);
        let mut rngs: Vec<_> = (0..options.trials).map(|k| stream(root, k as u64)).collect();
        let mut states = vec![x0; options.trials];
        let mut found = None;
        let mut prob = 0.0;
        for n in 1..=options.cap {
            let mut inside = 0usize;
            for (x, rng) in states.iter_mut().zip(&mut rngs) {
                let (rho, eps) = law.sample_pair(rng);
                *x = process::step(*x, rho, eps);
                if c <= *x && *x <= d {
                    inside += 1;
                }
            }
            prob = inside as f64 / options.trials as f64;
            if prob > theta {
                found = Some(n);
                break;
            }
        }
        entries.push(ThetaNxEntry { x0, n_x: found, probability: prob });
    }
    Ok(ThetaNxReport {
        interval,
        eta,
        shrunk,
        stationary_prob,
        delta,
        theta,
        options,
        entries,
    })
}

/// Bundle of all three checks for one law and interval, as rendered by the
/// CLI and serialized to JSON.
#[derive(Debug, Clone, Serialize)]
pub struct HarrisCheckReport {
    pub interval: (f64, f64),
    pub hitting: Vec<HittingEstimate>,
    /// `None` when the family has no transition-density oracle.
    pub minorization: Option<MinorizationReport>,
    pub theta_nx: ThetaNxReport,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{DiscreteJoint, IndependentProduct, JointAtom, Normal, PointMass, Uniform};
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
    fn huge_interval_is_hit_immediately() {
        let law = uniform_normal_law();
        let est = hitting_probability(&law, 0.0, (-1e6, 1e6), 1, 10_000, 31).unwrap();
        assert_eq!(est.probability, 1.0);
        assert_eq!(est.hits, 10_000);
    }

    #[test]
    fn deterministic_decreasing_path_misses() {
        // rho = 0.5, eps = 0 from x0 = 1 decays toward 0; [5, 6] is never hit.
        let law = IndependentProduct::new(
            Arc::new(PointMass::new(0.5).unwrap()),
            Arc::new(PointMass::new(0.0).unwrap()),
        );
        let est = hitting_probability(&law, 1.0, (5.0, 6.0), 50, 100, 32).unwrap();
        assert_eq!(est.probability, 0.0);
    }

    #[test]
    fn far_start_still_hits_central_interval() {
        let law = uniform_normal_law();
        let est = hitting_probability(&law, 100.0, (-0.5, 0.5), 200, 2_000, 33).unwrap();
        assert!(est.probability >= 0.999, "p = {}", est.probability);
    }

    #[test]
    fn hitting_is_monotone_in_horizon() {
        // Same root seed: each trial replays the same path prefix, so a hit
        // by step 5 is also a hit by step 50.
        let law = uniform_normal_law();
        let short = hitting_probability(&law, 10.0, (-0.5, 0.5), 5, 3_000, 34).unwrap();
        let long = hitting_probability(&law, 10.0, (-0.5, 0.5), 50, 3_000, 34).unwrap();
        assert!(short.probability <= long.probability);
    }

    #[test]
    fn hitting_estimates_agree_across_trial_counts() {
        let law = uniform_normal_law();
        let a = hitting_probability(&law, 3.0, (-0.3, 0.3), 10, 10_000, 35).unwrap();
        let b = hitting_probability(&law, 3.0, (-0.3, 0.3), 10, 40_000, 35).unwrap();
        let se = a.standard_error.max(1e-4);
        assert!(
            (a.probability - b.probability).abs() < 4.0 * se,
            "{} vs {}, se {se}",
            a.probability,
            b.probability
        );
    }

    #[test]
    fn zero_rho_minorization_is_the_noise_mass() {
        // With rho = 0 the transition density is the noise density for every
        // start, so the min over x equals the N(0,1) density itself.
        let law = IndependentProduct::new(
            Arc::new(PointMass::new(0.0).unwrap()),
            Arc::new(Normal::new(0.0, 1.0).unwrap()),
        );
        let x_grid = linspace(-1.0, 1.0, 11);
        let y_grid = linspace(-4.0, 4.0, 401);
        let rep = minorization_mass(&law, &x_grid, &y_grid).unwrap();
        let expect = 0.9999366575163338; // Phi(4) - Phi(-4)
        assert!((rep.mass - expect).abs() < 1e-3, "mass {}", rep.mass);
    }

    #[test]
    fn narrow_interval_keeps_most_mass() {
        let law = uniform_normal_law();
        let (x_grid, y_grid) =
            default_minorization_grids(&law, (-0.1, 0.1), 101, 401).unwrap();
        let rep = minorization_mass(&law, &x_grid, &y_grid).unwrap();
        assert!(rep.mass > 0.9, "mass {}", rep.mass);
    }

    #[test]
    fn wide_interval_collapses_the_minimum() {
        let law = uniform_normal_law();
        let (x_grid, y_grid) =
            default_minorization_grids(&law, (-1e3, 1e3), 101, 401).unwrap();
        let rep = minorization_mass(&law, &x_grid, &y_grid).unwrap();
        assert!(rep.mass < 0.01, "mass {}", rep.mass);
    }

    #[test]
    fn atomic_law_has_no_density_oracle() {
        let law = DiscreteJoint::new(vec![
            JointAtom { rho_value: 0.5, eps_value: 1.0, probability: 1.0 },
        ])
        .unwrap();
        let x_grid = linspace(-1.0, 1.0, 3);
        let y_grid = linspace(-2.0, 2.0, 5);
        match minorization_mass(&law, &x_grid, &y_grid) {
            Err(RegenError::DensityUnavailable { kind }) => assert_eq!(kind, "DiscreteJoint"),
            other => panic!("expected DensityUnavailable, got {other:?}"),
        }
    }

    #[test]
    fn memoryless_law_reaches_target_in_one_step() {
        // rho = 0: X_1 is already stationary from any start.
        let law = IndependentProduct::new(
            Arc::new(PointMass::new(0.0).unwrap()),
            Arc::new(Normal::new(0.0, 1.0).unwrap()),
        );
        let rep = estimate_theta_and_nx(
            &law,
            (-1.0, 1.0),
            &[0.0, 10.0, 100.0],
            0.05,
            ThetaNxOptions::default(),
            36,
        )
        .unwrap();
        assert!(rep.theta > 0.0);
        for e in &rep.entries {
            assert_eq!(e.n_x, Some(1), "x0 = {}", e.x0);
        }
    }

    #[test]
    fn forgetting_time_grows_with_start_distance() {
        let law = example_two();
        let rep = estimate_theta_and_nx(
            &law,
            (-0.46, 0.46),
            &[0.0, 10.0, 100.0],
            0.05,
            ThetaNxOptions { trials: 4_000, cap: 100, stationary_samples: 20_000 },
            37,
        )
        .unwrap();
        let nx: Vec<usize> = rep.entries.iter().map(|e| e.n_x.expect("within cap")).collect();
        assert!(nx[0] <= nx[1] && nx[1] <= nx[2], "n_x = {nx:?}");
        assert!(nx[2] > nx[0], "n_x = {nx:?}");
    }

    #[test]
    fn cap_is_reported_not_fatal() {
        let law = uniform_normal_law();
        let rep = estimate_theta_and_nx(
            &law,
            (-0.5, 0.5),
            &[1e8],
            0.01,
            ThetaNxOptions { trials: 500, cap: 2, stationary_samples: 5_000 },
            38,
        )
        .unwrap();
        assert_eq!(rep.entries[0].n_x, None);
    }
}
