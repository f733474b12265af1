//! Failure classification mapped onto process exit codes: 2 for config
//! problems, 3 for violated structural hypotheses, 1 for everything else.

use rcar_core::diagnostics::DiagnosticsError;
use rcar_core::dist::DistError;
use rcar_core::estimate::EstimateError;
use rcar_core::process::io::TrajectoryIoError;
use rcar_core::process::SimError;
use rcar_core::regen::RegenError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    /// The config or arguments are wrong; fix the input and rerun.
    #[error("config error: {0}")]
    Config(String),
    /// A structural hypothesis the pipeline depends on fails for this law.
    #[error("precondition failure: {0}")]
    Precondition(String),
    /// A failure during execution (I/O, degenerate data, overflow).
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Precondition(_) => 3,
            PipelineError::Runtime(_) => 1,
        }
    }
}

impl From<SimError> for PipelineError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidParameter(m) => PipelineError::Config(m),
            SimError::PreconditionViolated(m) => PipelineError::Precondition(m),
            other => PipelineError::Runtime(other.to_string()),
        }
    }
}

impl From<DistError> for PipelineError {
    fn from(e: DistError) -> Self {
        PipelineError::Config(e.to_string())
    }
}

impl From<RegenError> for PipelineError {
    fn from(e: RegenError) -> Self {
        match e {
            RegenError::InvalidParameter(m) => PipelineError::Config(m),
            RegenError::NoZeroAtom { .. } | RegenError::DensityUnavailable { .. } => {
                PipelineError::Precondition(e.to_string())
            }
            RegenError::Sim(inner) => inner.into(),
            other => PipelineError::Runtime(other.to_string()),
        }
    }
}

impl From<EstimateError> for PipelineError {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::InvalidParameter(m) => PipelineError::Config(m),
            other => PipelineError::Runtime(other.to_string()),
        }
    }
}

impl From<DiagnosticsError> for PipelineError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::TooFewSamples { .. } | DiagnosticsError::InvalidParameter(_) => {
                PipelineError::Config(e.to_string())
            }
            DiagnosticsError::Sim(inner) => inner.into(),
        }
    }
}

impl From<TrajectoryIoError> for PipelineError {
    fn from(e: TrajectoryIoError) -> Self {
        PipelineError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> Self {
        PipelineError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for PipelineError {
    fn from(e: csv::Error) -> Self {
        PipelineError::Runtime(e.to_string())
    }
}
