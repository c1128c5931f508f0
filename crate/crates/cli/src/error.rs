use thiserror::Error;

use rupture_core::density::DensityError;
use rupture_core::exact::ExactError;
use rupture_core::field::{FieldError, RfldError};
use rupture_core::gmt::GmtError;
use rupture_core::solver::SolverError;
use rupture_core::symmetry::SymmetryError;

/// Failure of one command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("verification failed: {failed} of {total} criteria")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::VerifyFailed { .. } => 1,
        }
    }

    pub fn config(msg: impl std::fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<RfldError> for CliError {
    fn from(e: RfldError) -> Self {
        CliError::Config(format!("field file (code {}): {e}", e.code()))
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::InvalidGrid(_) | FieldError::SizeMismatch { .. } | FieldError::GridTooSmall { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::Quadrature(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<DensityError> for CliError {
    fn from(e: DensityError) -> Self {
        match e {
            DensityError::Field(f) => f.into(),
            DensityError::EmptyIntersection | DensityError::LadderTooShort { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Field(f) => f.into(),
            SolverError::NonFinite(_) | SolverError::TooFewSnapshots { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SymmetryError> for CliError {
    fn from(e: SymmetryError) -> Self {
        match e {
            SymmetryError::Field(f) => f.into(),
            SymmetryError::BallOutside | SymmetryError::Clipped(_) | SymmetryError::NoCandidates => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<GmtError> for CliError {
    fn from(e: GmtError) -> Self {
        match e {
            GmtError::Field(f) => f.into(),
            GmtError::Density(d) => d.into(),
            GmtError::ZeroMass => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
