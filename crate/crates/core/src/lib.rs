//! Simulation and nonparametric estimation for random-coefficient AR(1)
//! sequences `X_n = rho_n * X_{n-1} + eps_n`, where the coefficient pairs
//! `(rho_n, eps_n)` are drawn i.i.d. from a configurable joint law.
//!
//! The crate covers four concerns:
//!
//! * [`dist`]: coefficient-pair laws and their closed-form / quadrature
//!   oracles (log-moments, transition CDF, characteristic functions).
//! * [`process`]: trajectory simulation, direct sampling from the stationary
//!   limit via the a.s.-convergent random series, and deterministic seeded
//!   ensembles.
//! * [`regen`]: regeneration structure when `P(rho = 0) > 0`, and numerical
//!   checks of the Harris-recurrence conditions (hitting probabilities,
//!   minorization mass).
//! * [`estimate`] / [`diagnostics`]: binned nonparametric estimators of the
//!   transition CDF and conditional characteristic function, recovery of the
//!   coefficient characteristic functions, and distributional diagnostics.
//!
//! All Monte Carlo entry points take a root seed and derive one counter-based
//! substream per chain, so results are independent of worker count and
//! scheduling.

pub mod diagnostics;
pub mod dist;
pub mod estimate;
pub mod numeric;
pub mod process;
pub mod regen;
pub mod rng;
pub mod stats;

pub use dist::{CoefficientLaw, Marginal};
pub use process::{StationaryConfig, StationarySample, Trajectory};

/// Crate version, embedded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
