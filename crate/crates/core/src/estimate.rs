//! Binned nonparametric estimators over a single trajectory.
//!
//! All estimators condition on the visited state falling in the half-open
//! bin `(x, x + h]` and average over the next state. The transition-CDF
//! estimator is a ratio of integer counts; the conditional characteristic
//! function averages `e^{i t X_next}` over the bin in visit order, which
//! makes `phi(0) = 1` exact and `phi(-t) = conj(phi(t))` bit-exact. Under
//! an independent coefficient pair, the bin at `x = 0` recovers the noise
//! characteristic function and a ratio of two bins recovers the growth
//! coefficient's; both are consistent as `n` grows and then `h` shrinks,
//! realized here as a dyadic bandwidth ladder at fixed large `n`.

use crate::process::Trajectory;
use crate::stats::{self, cis};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

/// Below this denominator modulus a characteristic-function ratio is
/// statistically unusable and the entry is flagged invalid instead.
pub const DEFAULT_CF_FLOOR: f64 = 0.05;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("the bin ({x}, {x} + {h}] contains no visited state")]
    EmptyBin { x: f64, h: f64 },
    #[error("every ratio entry fell below the denominator floor {floor}")]
    AllInvalid { floor: f64 },
    #[error("states have zero variance; no data-driven bandwidth exists")]
    ZeroVariance,
}

/// Transition-CDF estimate at one bin, over a y-grid.
#[derive(Debug, Clone)]
pub struct TransitionCdfEstimate {
    pub x: f64,
    pub h: f64,
    pub y_grid: Vec<f64>,
    /// `P(X_next <= y | X in (x, x+h])` estimates aligned to `y_grid`; all
    /// zero when the bin is empty (the empty flag is data, not an error).
    pub values: Vec<f64>,
    pub bin_count: usize,
    pub empty_bin: bool,
}

/// Conditional characteristic-function estimate at one bin, over a t-grid.
#[derive(Debug, Clone)]
pub struct CharFnEstimate {
    pub x: f64,
    pub h: f64,
    pub t_grid: Vec<f64>,
    /// Aligned to `t_grid`; zero where the bin is empty or (for ratio
    /// estimates) the entry is invalid.
    pub values: Vec<Complex64>,
    /// Per-entry usability; uniformly false exactly when the bin is empty.
    pub valid: Vec<bool>,
    pub bin_count: usize,
    pub empty_bin: bool,
}

fn check_bandwidth(h: f64) -> Result<(), EstimateError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(EstimateError::InvalidParameter(format!(
            "bandwidth must be a positive finite real, got {h}"
        )));
    }
    Ok(())
}

fn check_nonempty(traj: &Trajectory) -> Result<(), EstimateError> {
    if traj.is_empty() {
        return Err(EstimateError::InvalidParameter("trajectory has no transitions".into()));
    }
    Ok(())
}

/// Successors `X_{i+1}` of the visits `X_i` in `(x, x+h]`, i = 0..n-1, in
/// visit order. Visit order fixes the summation order of every estimator.
fn bin_successors(traj: &Trajectory, x: f64, h: f64) -> Vec<f64> {
    let hi = x + h;
    let mut out = Vec::new();
    for i in 0..traj.len() {
        let xi = traj.state(i);
        if xi > x && xi <= hi {
            out.push(traj.states[i]);
        }
    }
    out
}

/// Ratio-of-counts estimate of the transition CDF at the bin `(x, x+h]`:
/// among visits to the bin, the fraction whose successor is `<= y`. The
/// empty bin yields all-zero values with the empty flag set.
pub fn transition_cdf_estimate(
    traj: &Trajectory,
    x: f64,
    h: f64,
    y_grid: &[f64],
) -> Result<TransitionCdfEstimate, EstimateError> {
    check_bandwidth(h)?;
    check_nonempty(traj)?;
    if y_grid.is_empty() || y_grid.iter().any(|y| !y.is_finite()) {
        return Err(EstimateError::InvalidParameter("y-grid must be nonempty and finite".into()));
    }
    if y_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(EstimateError::InvalidParameter("y-grid must be sorted ascending".into()));
    }
    let mut succ = bin_successors(traj, x, h);
    let bin_count = succ.len();
    succ.sort_by(f64::total_cmp);
    let values = if bin_count == 0 {
        vec![0.0; y_grid.len()]
    } else {
        y_grid
            .iter()
            .map(|&y| succ.partition_point(|v| *v <= y) as f64 / bin_count as f64)
            .collect()
    };
    Ok(TransitionCdfEstimate {
        x,
        h,
        y_grid: y_grid.to_vec(),
        values,
        bin_count,
        empty_bin: bin_count == 0,
    })
}

/// Empirical conditional characteristic function at the bin `(x, x+h]`:
/// the mean of `e^{i t X_next}` over bin visits. Entries are computed
/// independently per `t` with a fixed summation order, so results do not
/// depend on the thread count.
pub fn conditional_cf_estimate(
    traj: &Trajectory,
    x: f64,
    h: f64,
    t_grid: &[f64],
) -> Result<CharFnEstimate, EstimateError> {
    check_bandwidth(h)?;
    check_nonempty(traj)?;
    if t_grid.is_empty() || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(EstimateError::InvalidParameter("t-grid must be nonempty and finite".into()));
    }
    let succ = bin_successors(traj, x, h);
    let bin_count = succ.len();
    let values: Vec<Complex64> = if bin_count == 0 {
        vec![Complex64::new(0.0, 0.0); t_grid.len()]
    } else {
        t_grid
            .par_iter()
            .map(|&t| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &v in &succ {
                    acc += cis(t * v);
                }
                acc / bin_count as f64
            })
            .collect()
    };
    Ok(CharFnEstimate {
        x,
        h,
        t_grid: t_grid.to_vec(),
        values,
        valid: vec![bin_count > 0; t_grid.len()],
        bin_count,
        empty_bin: bin_count == 0,
    })
}

/// Noise characteristic function: the conditional estimate at `x = 0`,
/// where the bin's contribution of the growth term vanishes. Valid when
/// the coefficient pair is independent (asserted by the caller; one
/// trajectory cannot verify it). An empty bin near zero is an error here,
/// since the caller asked for this specific recovery; widen `h` to fix it.
pub fn recover_eps_cf(
    traj: &Trajectory,
    h: f64,
    t_grid: &[f64],
) -> Result<CharFnEstimate, EstimateError> {
    let est = conditional_cf_estimate(traj, 0.0, h, t_grid)?;
    if est.empty_bin {
        return Err(EstimateError::EmptyBin { x: 0.0, h });
    }
    Ok(est)
}

/// Growth-coefficient characteristic function by the ratio
/// `phi_{x_probe}(t / x_probe) / phi_0(t / x_probe)`: the numerator carries
/// `psi_rho(t) psi_eps(t / x_probe)` and the denominator cancels the noise
/// factor. Entries whose denominator modulus falls below `floor` are
/// flagged invalid (the ratio's variance explodes there) and carry a zero
/// value. `t_grid` keeps the caller's `t` parametrization.
pub fn recover_rho_cf(
    traj: &Trajectory,
    h: f64,
    x_probe: f64,
    t_grid: &[f64],
    floor: f64,
) -> Result<CharFnEstimate, EstimateError> {
    if x_probe == 0.0 || !x_probe.is_finite() {
        return Err(EstimateError::InvalidParameter(format!(
            "x_probe must be finite and nonzero, got {x_probe}"
        )));
    }
    if !(floor > 0.0) {
        return Err(EstimateError::InvalidParameter(format!(
            "denominator floor must be positive, got {floor}"
        )));
    }
    let s_grid: Vec<f64> = t_grid.iter().map(|&t| t / x_probe).collect();
    let num = conditional_cf_estimate(traj, x_probe, h, &s_grid)?;
    if num.empty_bin {
        return Err(EstimateError::EmptyBin { x: x_probe, h });
    }
    let den = conditional_cf_estimate(traj, 0.0, h, &s_grid)?;
    if den.empty_bin {
        return Err(EstimateError::EmptyBin { x: 0.0, h });
    }
    let mut values = Vec::with_capacity(t_grid.len());
    let mut valid = Vec::with_capacity(t_grid.len());
    for (n, d) in num.values.iter().zip(&den.values) {
        if d.norm() >= floor {
            values.push(n / d);
            valid.push(true);
        } else {
            values.push(Complex64::new(0.0, 0.0));
            valid.push(false);
        }
    }
    if valid.iter().all(|v| !v) {
        return Err(EstimateError::AllInvalid { floor });
    }
    Ok(CharFnEstimate {
        x: x_probe,
        h,
        t_grid: t_grid.to_vec(),
        values,
        valid,
        bin_count: num.bin_count,
        empty_bin: false,
    })
}

/// Joint characteristic function of the coefficient pair at `(t1, t2)` via
/// the identity `E e^{i(t1 rho + t2 eps)} = lim phi_x(t2)` at `x = t1/t2`:
/// the conditional estimate at the implied bin. Requires `t2 != 0`.
pub fn joint_cf_from_transition(
    traj: &Trajectory,
    h: f64,
    t1: f64,
    t2: f64,
) -> Result<Complex64, EstimateError> {
    if t2 == 0.0 || !t2.is_finite() || !t1.is_finite() {
        return Err(EstimateError::InvalidParameter(format!(
            "need finite t1 and nonzero finite t2, got ({t1}, {t2})"
        )));
    }
    let x = t1 / t2;
    let est = conditional_cf_estimate(traj, x, h, &[t2])?;
    if est.empty_bin {
        return Err(EstimateError::EmptyBin { x, h });
    }
    Ok(est.values[0])
}

/// Plug-in bandwidth `1.06 sigma n^{-1/5}` from the states' sample
/// standard deviation. The consistency theory takes `h -> 0` after
/// `n -> inf` without a rate; this rule is a practical default, and the
/// dyadic ladder shows stabilization around it.
pub fn bandwidth_default(states: &[f64]) -> Result<f64, EstimateError> {
    if states.len() < 2 {
        return Err(EstimateError::InvalidParameter(format!(
            "bandwidth needs at least 2 states, got {}",
            states.len()
        )));
    }
    let sd = stats::sample_sd(states);
    if sd == 0.0 {
        return Err(EstimateError::ZeroVariance);
    }
    Ok(1.06 * sd * (states.len() as f64).powf(-0.2))
}

/// Default probe point for the coefficient-CF ratio: the (upper) median of
/// the visited magnitudes, ignoring states within a tenth of a standard
/// deviation of zero. High empirical density, away from the degenerate
/// probe at the origin.
pub fn default_x_probe(states: &[f64]) -> Result<f64, EstimateError> {
    if states.is_empty() {
        return Err(EstimateError::InvalidParameter("no states".into()));
    }
    let cut = if states.len() >= 2 { stats::sample_sd(states) / 10.0 } else { 0.0 };
    let mut mags: Vec<f64> = states.iter().map(|s| s.abs()).filter(|&m| m > cut).collect();
    if mags.is_empty() {
        return Err(EstimateError::InvalidParameter(
            "every state sits at zero; no usable probe point".into(),
        ));
    }
    mags.sort_by(f64::total_cmp);
    Ok(mags[mags.len() / 2])
}

/// The bandwidth ladder `h0, h0/2, ..., h0 / 2^(levels-1)` realizing the
/// "n first, then h" double limit at fixed `n`. Halving is exact.
pub fn dyadic_bandwidths(h0: f64, levels: usize) -> Result<Vec<f64>, EstimateError> {
    check_bandwidth(h0)?;
    if levels == 0 {
        return Err(EstimateError::InvalidParameter("ladder needs at least one level".into()));
    }
    Ok((0..levels).map(|k| h0 / (1u64 << k) as f64).collect())
}
