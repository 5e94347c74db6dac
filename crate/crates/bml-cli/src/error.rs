//! Error type carrying the documented exit codes.

use bml_core::buslaev::CycleError;
use bml_core::dynamics::DynamicsError;
use bml_core::generate::GenerateError;
use bml_core::lattice::{RecordError, ShapeError, ValidationError};
use bml_core::spectrum::SpectrumError;
use bml_core::verify::VerifyError;
use thiserror::Error;

/// Exit codes: 0 success, 1 usage or config error, 2 budget exceeded,
/// 3 counterexample / falsification, 4 runtime (I/O) failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Falsification(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Budget(_) => 2,
            CliError::Falsification(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Self {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

impl From<ShapeError> for CliError {
    fn from(e: ShapeError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ValidationError> for CliError {
    fn from(e: ValidationError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<RecordError> for CliError {
    fn from(e: RecordError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<GenerateError> for CliError {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            GenerateError::CountOutOfRange { .. } => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CycleError> for CliError {
    fn from(e: CycleError) -> Self {
        match e {
            CycleError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            CycleError::EmptyConfiguration => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::Generate(inner) => inner.into(),
            SpectrumError::Cycle(inner) => inner.into(),
            SpectrumError::NoParticles => CliError::Usage(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Generate(inner) => inner.into(),
            VerifyError::Cycle(inner) => inner.into(),
            VerifyError::HypothesisNotMet { .. } | VerifyError::NoParticles => {
                CliError::Usage(e.to_string())
            }
        }
    }
}
