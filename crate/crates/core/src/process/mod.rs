//! Trajectory simulation and direct sampling from the stationary limit.
//!
//! Under `E log|rho| < 0` (possibly `-inf`) and `E (log|eps|)^+ < inf` the
//! backward series `eps_1 + rho_1 eps_2 + rho_1 rho_2 eps_3 + ...` converges
//! almost surely; its law is the stationary law of the recurrence.
//! [`StationarySampler`] evaluates that series directly, truncating once the
//! running coefficient product drops below a tolerance. The product is
//! tracked in log-absolute form with separate sign and exact-zero flags, so
//! a long run of small coefficients never underflows.

mod ensemble;
pub mod io;

pub use ensemble::{
    run_ensemble, run_stationary_ensemble, stationary_values, terminal_values, EnsembleSpec,
};

use crate::dist::CoefficientLaw;
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("state became non-finite at step {step}")]
    NonFinite { step: usize },
    #[error("chain {chain} failed: state became non-finite at step {step}")]
    ChainNonFinite { chain: usize, step: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// One transition of the recurrence. Every consumer of the identity
/// `X_n = rho_n X_{n-1} + eps_n` goes through this function, so the exact
/// floating-point expression is fixed in one place (no fused multiply-add).
#[inline]
pub fn step(x: f64, rho: f64, eps: f64) -> f64 {
    rho * x + eps
}

/// A simulated path: the start value, the visited states `X_1 ... X_n`, and
/// optionally the driving pairs that produced each transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x0: f64,
    pub states: Vec<f64>,
    /// `(rho_i, eps_i)` for `i = 1 ..= n`, kept when requested.
    pub driving: Option<Vec<(f64, f64)>>,
    /// Stream index the path was drawn from (0 for single runs).
    pub stream_id: u64,
}

impl Trajectory {
    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The visited state before transition `i + 1`: `state(0) = x0`,
    /// `state(i) = X_i`.
    pub fn state(&self, i: usize) -> f64 {
        if i == 0 {
            self.x0
        } else {
            self.states[i - 1]
        }
    }
}

/// Simulates `n >= 1` transitions from `x0`. Fails with the offending step
/// index if the state overflows, which is possible in the non-contracting
/// regime.
pub fn simulate(
    law: &dyn CoefficientLaw,
    x0: f64,
    n: usize,
    retain_driving: bool,
    rng: &mut RngStream,
) -> Result<Trajectory, SimError> {
    if n == 0 {
        return Err(SimError::InvalidParameter("simulate requires n >= 1".into()));
    }
    if !x0.is_finite() {
        return Err(SimError::InvalidParameter(format!("x0 must be finite, got {x0}")));
    }
    let mut states = Vec::with_capacity(n);
    let mut driving = retain_driving.then(|| Vec::with_capacity(n));
    let mut x = x0;
    for i in 1..=n {
        let (rho, eps) = law.sample_pair(rng);
        x = step(x, rho, eps);
        if !x.is_finite() {
            return Err(SimError::NonFinite { step: i });
        }
        states.push(x);
        if let Some(d) = driving.as_mut() {
            d.push((rho, eps));
        }
    }
    Ok(Trajectory { x0, states, driving, stream_id: 0 })
}

/// Truncation controls for the stationary-series sampler.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct StationaryConfig {
    /// Stop once `|rho_1 ... rho_N| <= tol_prod`.
    pub tol_prod: f64,
    /// Always evaluate at least this many terms.
    pub n_min: usize,
    /// Give up (with `truncated = true`) after this many terms.
    pub n_max: usize,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        Self { tol_prod: 1e-12, n_min: 16, n_max: 100_000 }
    }
}

/// One draw from the stationary law.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StationarySample {
    pub value: f64,
    /// Terms of the series actually summed.
    pub terms_used: usize,
    /// `|rho_1 ... rho_N| * scale(eps)`: a bound proxy for the discarded tail.
    pub tail_bound: f64,
    /// Magnitude of the first omitted series increment,
    /// `|rho_1 ... rho_N| |eps_{N+1}|`.
    pub last_increment: f64,
    /// Whether `n_max` was reached before the product tolerance.
    pub truncated: bool,
}

/// Running product `rho_1 ... rho_k` in log-absolute form.
#[derive(Debug, Clone, Copy)]
struct LogProduct {
    log_abs: f64,
    negative: bool,
    zero: bool,
}

impl LogProduct {
    fn one() -> Self {
        Self { log_abs: 0.0, negative: false, zero: false }
    }

    fn mul(&mut self, r: f64) {
        if r == 0.0 {
            self.zero = true;
        } else {
            self.log_abs += r.abs().ln();
            self.negative ^= r < 0.0;
        }
    }

    fn abs_leq(&self, ln_tol: f64) -> bool {
        self.zero || self.log_abs <= ln_tol
    }

    fn value(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            let mag = self.log_abs.exp(); // underflows to 0 harmlessly
            if self.negative {
                -mag
            } else {
                mag
            }
        }
    }

    fn abs_value(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            self.log_abs.exp()
        }
    }
}

/// Validated sampler for the stationary series. Construction checks the
/// convergence hypotheses once; reuse one sampler for bulk draws.
pub struct StationarySampler<'a> {
    law: &'a dyn CoefficientLaw,
    cfg: StationaryConfig,
    ln_tol: f64,
    eps_scale: f64,
}

impl<'a> StationarySampler<'a> {
    pub fn new(law: &'a dyn CoefficientLaw, cfg: StationaryConfig) -> Result<Self, SimError> {
        if !(cfg.tol_prod > 0.0) || !cfg.tol_prod.is_finite() {
            return Err(SimError::InvalidParameter(format!(
                "tol_prod must be a positive finite real, got {}",
                cfg.tol_prod
            )));
        }
        if cfg.n_min == 0 || cfg.n_max < cfg.n_min {
            return Err(SimError::InvalidParameter(format!(
                "need 1 <= n_min <= n_max, got n_min={} n_max={}",
                cfg.n_min, cfg.n_max
            )));
        }
        let log_rho = law.log_moment_rho();
        if !log_rho.is_negative() {
            return Err(SimError::PreconditionViolated(format!(
                "stationary series requires E log|rho| < 0, but E log|rho| = {log_rho}"
            )));
        }
        let log_plus = law.log_plus_moment_eps();
        if !log_plus.is_finite() {
            return Err(SimError::PreconditionViolated(format!(
                "stationary series requires E (log|eps|)^+ < inf, but it is {log_plus}"
            )));
        }
        Ok(Self { law, cfg, ln_tol: cfg.tol_prod.ln(), eps_scale: law.eps_scale() })
    }

    pub fn sample(&self, rng: &mut RngStream) -> StationarySample {
        let mut sum = 0.0;
        let mut prod = LogProduct::one();
        let mut n = 0usize;
        loop {
            let (rho, eps) = self.law.sample_pair(rng);
            n += 1;
            sum += prod.value() * eps; // term rho_1 ... rho_{n-1} eps_n
            prod.mul(rho);
            let done = n >= self.cfg.n_min && prod.abs_leq(self.ln_tol);
            if done || n >= self.cfg.n_max {
                // One extra pair gives the first omitted increment.
                let (_, eps_next) = self.law.sample_pair(rng);
                let tail_coeff = prod.abs_value();
                return StationarySample {
                    value: sum,
                    terms_used: n,
                    tail_bound: tail_coeff * self.eps_scale,
                    last_increment: tail_coeff * eps_next.abs(),
                    truncated: !done,
                };
            }
        }
    }
}

/// Single stationary draw; validates the hypotheses per call. For bulk
/// sampling construct a [`StationarySampler`] (or use
/// [`stationary_values`]) so validation runs once.
pub fn sample_stationary(
    law: &dyn CoefficientLaw,
    cfg: StationaryConfig,
    rng: &mut RngStream,
) -> Result<StationarySample, SimError> {
    Ok(StationarySampler::new(law, cfg)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{IndependentProduct, Normal, PointMass, Uniform, ZeroInflatedRho};
    use crate::rng::stream;
    use crate::stats;
    use std::sync::Arc;

    fn uniform_normal_law() -> IndependentProduct {
        IndependentProduct::new(
            Arc::new(Uniform::new(0.2, 0.8).unwrap()),
            Arc::new(Normal::new(0.0, 1.0).unwrap()),
        )
    }

    fn constant_law(rho: f64, eps: f64) -> IndependentProduct {
        IndependentProduct::new(
            Arc::new(PointMass::new(rho).unwrap()),
            Arc::new(PointMass::new(eps).unwrap()),
        )
    }

    #[test]
    fn deterministic_contraction_path() {
        // rho = 0.5, eps = 1, x0 = 0: states 1, 1.5, 1.75.
        let law = constant_law(0.5, 1.0);
        let mut rng = stream(0, 0);
        let t = simulate(&law, 0.0, 3, true, &mut rng).unwrap();
        assert_eq!(t.states, vec![1.0, 1.5, 1.75]);
        let d = t.driving.as_ref().unwrap();
        assert_eq!(d, &vec![(0.5, 1.0); 3]);
    }

    #[test]
    fn recurrence_identity_holds_exactly() {
        let law = uniform_normal_law();
        let mut rng = stream(1, 0);
        let t = simulate(&law, 0.3, 500, true, &mut rng).unwrap();
        let d = t.driving.as_ref().unwrap();
        for i in 0..t.len() {
            assert_eq!(t.states[i], step(t.state(i), d[i].0, d[i].1));
        }
    }

    #[test]
    fn divergent_chain_reports_step() {
        // rho = 2 doubles the state; from 1e308 the first step overflows.
        let law = constant_law(2.0, 1.0);
        let mut rng = stream(2, 0);
        match simulate(&law, 1e308, 10, false, &mut rng) {
            Err(SimError::NonFinite { step }) => assert_eq!(step, 1),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn zero_length_rejected() {
        let law = constant_law(0.5, 1.0);
        let mut rng = stream(3, 0);
        assert!(simulate(&law, 0.0, 0, false, &mut rng).is_err());
    }

    #[test]
    fn stationary_geometric_series() {
        // rho = 0.5, eps = 1: the series sums to 2 - 2^{-(N-1)}; termination
        // at the first N >= n_min with 0.5^N <= 1e-12, i.e. N = 40.
        let law = constant_law(0.5, 1.0);
        let mut rng = stream(4, 0);
        let s = sample_stationary(&law, StationaryConfig::default(), &mut rng).unwrap();
        assert_eq!(s.terms_used, 40);
        assert!((s.value - 2.0).abs() < 2e-12, "value {}", s.value);
        assert!(!s.truncated);
        assert!(s.tail_bound <= 1e-12 * 1.0 + f64::EPSILON);
    }

    #[test]
    fn stationary_requires_contraction() {
        let law = constant_law(1.5, 1.0);
        let mut rng = stream(5, 0);
        match sample_stationary(&law, StationaryConfig::default(), &mut rng) {
            Err(SimError::PreconditionViolated(msg)) => {
                assert!(msg.contains("E log|rho|"), "{msg}")
            }
            other => panic!("expected precondition failure, got {other:?}"),
        }
    }

    #[test]
    fn stationary_zero_rho_collapses_to_eps() {
        // alpha = 1: the product is exactly zero after one factor and the
        // series equals eps_1; n_min terms are still evaluated.
        let law = ZeroInflatedRho::new(
            1.0,
            Arc::new(Uniform::new(0.2, 0.8).unwrap()),
            Arc::new(Normal::new(0.0, 1.0).unwrap()),
        )
        .unwrap();
        let cfg = StationaryConfig::default();
        let sampler = StationarySampler::new(&law, cfg).unwrap();
        let mut rng = stream(6, 0);
        let mut rng_replay = stream(6, 0);
        let (_, eps1) = law.sample_pair(&mut rng_replay);
        let s = sampler.sample(&mut rng);
        assert_eq!(s.value, eps1);
        assert_eq!(s.terms_used, cfg.n_min);
        assert_eq!(s.tail_bound, 0.0);
        assert_eq!(s.last_increment, 0.0);
    }

    #[test]
    fn stationary_increments_vanish_at_termination() {
        let law = uniform_normal_law();
        let cfg = StationaryConfig::default();
        let sampler = StationarySampler::new(&law, cfg).unwrap();
        let bound = 10.0 * cfg.tol_prod * law.eps_scale();
        for k in 0..100 {
            let s = sampler.sample(&mut stream(7, k));
            assert!(!s.truncated);
            assert!(s.last_increment < bound, "increment {} at k={k}", s.last_increment);
        }
    }

    #[test]
    fn truncation_flag_when_product_cannot_reach_tol() {
        // rho = 0.999 contracts too slowly to reach 1e-12 within n_max = 50.
        let law = constant_law(0.999, 1.0);
        let cfg = StationaryConfig { n_max: 50, ..StationaryConfig::default() };
        let mut rng = stream(8, 0);
        let s = sample_stationary(&law, cfg, &mut rng).unwrap();
        assert!(s.truncated);
        assert_eq!(s.terms_used, 50);
    }

    #[test]
    fn slln_running_mean_of_log_rho() {
        // (1/n) sum log rho_i at n = 1e4 within 3 SEs of E log rho.
        let law = uniform_normal_law();
        let mut rng = stream(9, 0);
        let t = simulate(&law, 0.0, 10_000, true, &mut rng).unwrap();
        let logs: Vec<f64> =
            t.driving.unwrap().iter().map(|&(r, _)| r.abs().ln()).collect();
        let m = stats::mean(&logs);
        let se = stats::sample_sd(&logs) / (logs.len() as f64).sqrt();
        let expect = law.log_moment_rho().as_f64();
        assert!((m - expect).abs() < 3.0 * se, "mean {m}, expect {expect}, se {se}");
    }

    #[test]
    fn chain_mean_near_zero_for_symmetric_noise() {
        // E X = 0 for the uniform-normal law; use batch means for the autocorrelated SE.
        let law = uniform_normal_law();
        let mut rng = stream(10, 0);
        let t = simulate(&law, 0.0, 1_000_000, false, &mut rng).unwrap();
        let m = stats::mean(&t.states);
        let se = stats::batch_mean_se(&t.states, 1000);
        assert!(m.abs() < 3.0 * se, "mean {m} se {se}");
    }
}
