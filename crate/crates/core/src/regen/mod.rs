//! Regeneration-cycle decomposition for laws with an atom at `rho = 0`.
//!
//! When `P(rho = 0) = alpha > 0`, every time `n` with `rho_n = 0` erases the
//! past: `X_n = eps_n` regardless of history, so the path splits into i.i.d.
//! cycles whose lengths are `Geometric(alpha)`. This module finds those
//! times, checks the geometric law and the exact regeneration identity, and
//! (in [`harris`]) runs the numerical recurrence checks that apply when the
//! atom is absent.

pub mod harris;

use crate::dist::CoefficientLaw;
use crate::process::{SimError, Trajectory};
use crate::stats::{self, ChiSquareResult, KsResult};
use serde::Serialize;
use thiserror::Error;

/// Minimum complete cycles (or regeneration values) for the statistical
/// reports; below this the asymptotic tests are unreliable.
pub const MIN_CYCLES: usize = 100;

#[derive(Debug, Error)]
pub enum RegenError {
    #[error("trajectory does not retain its driving pairs")]
    MissingDriving,
    #[error("need at least {required} complete cycles, found {found}")]
    TooFewCycles { found: usize, required: usize },
    #[error(
        "regeneration identity X_tau = eps_tau violated at tau = {tau}: \
         X = {x}, eps = {eps} (implementation bug)"
    )]
    IdentityViolated { tau: usize, x: f64, eps: f64 },
    #[error("law {kind:?} has no conditional noise law at rho = 0")]
    NoZeroAtom { kind: &'static str },
    #[error("no transition density available for law {kind:?}")]
    DensityUnavailable { kind: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// One complete cycle: the states from a regeneration time (inclusive) up to
/// the next one (exclusive).
#[derive(Debug, Clone, Copy)]
pub struct Cycle<'a> {
    /// 1-based time of the regeneration opening this cycle.
    pub start: usize,
    /// Steps until the next regeneration.
    pub length: usize,
    /// `X_start ..= X_{start + length - 1}`.
    pub states: &'a [f64],
}

/// A trajectory split at its regeneration times.
#[derive(Debug, Clone)]
pub struct RegenerationDecomposition<'a> {
    /// 1-based times `n` with `rho_n` exactly zero; strictly increasing.
    /// Empty when no regeneration was observed.
    pub tau: Vec<usize>,
    states: &'a [f64],
}

impl RegenerationDecomposition<'_> {
    /// Trajectory length the decomposition was taken from.
    pub fn n(&self) -> usize {
        self.states.len()
    }

    /// Number of complete cycles (one fewer than regeneration times).
    pub fn cycle_count(&self) -> usize {
        self.tau.len().saturating_sub(1)
    }

    /// Successive differences of the regeneration times.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        self.tau.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Complete cycles with their state slices.
    pub fn cycles(&self) -> Vec<Cycle<'_>> {
        self.tau
            .windows(2)
            .map(|w| Cycle {
                start: w[0],
                length: w[1] - w[0],
                states: &self.states[w[0] - 1..w[1] - 1],
            })
            .collect()
    }

    /// States strictly before the first regeneration (the delay segment);
    /// the whole path when no regeneration was observed.
    pub fn delay_states(&self) -> &[f64] {
        let end = self.tau.first().map_or(self.states.len(), |&t| t - 1);
        &self.states[..end]
    }

    /// `X_tau` at every regeneration time.
    pub fn regeneration_values(&self) -> Vec<f64> {
        self.tau.iter().map(|&t| self.states[t - 1]).collect()
    }
}

/// Splits a driving-retaining trajectory at the times with a zero growth
/// coefficient. Zero is detected by exact float equality: the atom is
/// generated by branching, so a zero coefficient is the literal constant
/// `0.0`, and tolerance-based detection would invent false regenerations.
pub fn decompose(traj: &Trajectory) -> Result<RegenerationDecomposition<'_>, RegenError> {
    let driving = traj.driving.as_ref().ok_or(RegenError::MissingDriving)?;
    let tau: Vec<usize> = driving
        .iter()
        .enumerate()
        .filter(|&(_, &(rho, _))| rho == 0.0)
        .map(|(i, _)| i + 1)
        .collect();
    Ok(RegenerationDecomposition { tau, states: &traj.states })
}

/// Cycle-length report against the `Geometric(alpha)` hypothesis.
#[derive(Debug, Clone, Serialize)]
pub struct GeometricReport {
    pub cycle_count: usize,
    pub mean_length: f64,
    /// Standard error of the mean length.
    pub se_length: f64,
    /// `1 / alpha`, the geometric mean length.
    pub expected_mean: f64,
    pub chi_square: ChiSquareResult,
    /// First-half vs second-half cycle lengths; a proxy for the cycles being
    /// identically distributed along the path.
    pub halves_ks: KsResult,
}

/// Tests observed cycle lengths against `Geometric(alpha)`.
pub fn cycle_length_diagnostics(
    lengths: &[usize],
    alpha: f64,
) -> Result<GeometricReport, RegenError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(RegenError::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if lengths.len() < MIN_CYCLES {
        return Err(RegenError::TooFewCycles { found: lengths.len(), required: MIN_CYCLES });
    }
    let as_f64: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    let mean = stats::mean(&as_f64);
    let se = stats::sample_sd(&as_f64) / (as_f64.len() as f64).sqrt();
    let chi = stats::chi_square_geometric(lengths, alpha, 5.0);
    let mid = as_f64.len() / 2;
    let ks = stats::ks_two_sample(&as_f64[..mid], &as_f64[mid..]);
    Ok(GeometricReport {
        cycle_count: lengths.len(),
        mean_length: mean,
        se_length: se,
        expected_mean: 1.0 / alpha,
        chi_square: chi,
        halves_ks: ks,
    })
}

/// [`cycle_length_diagnostics`] on a decomposition's complete cycles.
pub fn geometric_diagnostics(
    decomp: &RegenerationDecomposition,
    alpha: f64,
) -> Result<GeometricReport, RegenError> {
    cycle_length_diagnostics(&decomp.cycle_lengths(), alpha)
}

/// Distributional report on the regeneration values `X_tau`.
#[derive(Debug, Clone, Serialize)]
pub struct RegenValueReport {
    pub count: usize,
    /// One-sample KS of `{X_tau}` against the conditional noise law at
    /// `rho = 0`; `None` when that law is atomic or has no CDF oracle.
    pub ks: Option<KsResult>,
    /// For an atomic conditional law: whether every regeneration value is
    /// one of the atoms. `None` otherwise.
    pub atoms_matched: Option<bool>,
}

/// Checks the exact identity `X_tau = eps_tau` at every regeneration time,
/// then compares the regeneration values against the law of `eps` given
/// `rho = 0`. An identity failure means the simulator or decomposition is
/// broken and is reported as a hard error.
pub fn regeneration_value_check(
    decomp: &RegenerationDecomposition,
    traj: &Trajectory,
    law: &dyn CoefficientLaw,
) -> Result<RegenValueReport, RegenError> {
    let driving = traj.driving.as_ref().ok_or(RegenError::MissingDriving)?;
    for &t in &decomp.tau {
        let x = traj.states[t - 1];
        let eps = driving[t - 1].1;
        if x != eps {
            return Err(RegenError::IdentityViolated { tau: t, x, eps });
        }
    }
    if decomp.tau.len() < MIN_CYCLES {
        return Err(RegenError::TooFewCycles { found: decomp.tau.len(), required: MIN_CYCLES });
    }
    let cond = law
        .eps_given_rho_zero()
        .ok_or(RegenError::NoZeroAtom { kind: law.kind() })?;
    let values = decomp.regeneration_values();
    let (ks, atoms_matched) = if let Some(atoms) = cond.atoms() {
        let ok = values.iter().all(|v| atoms.iter().any(|&(a, _)| a == *v));
        (None, Some(ok))
    } else if cond.cdf(0.0).is_some() {
        (Some(stats::ks_one_sample(&values, |y| cond.cdf(y).expect("probed above"))), None)
    } else {
        (None, None)
    };
    Ok(RegenValueReport { count: values.len(), ks, atoms_matched })
}
