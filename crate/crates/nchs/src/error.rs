use std::path::PathBuf;
use std::process::ExitCode;

use nchs_core::Error as CoreError;

/// Process exit status shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    VerificationFailed = 1,
    BadInput = 2,
    NoConvergence = 3,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s.code())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("csv export failed: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn status(&self) -> Status {
        match self {
            Self::Core(e) => core_status(e),
            Self::Io { .. } | Self::Json { .. } | Self::Usage(_) | Self::Csv(_) => Status::BadInput,
        }
    }
}

/// Non-convergence maps to 3, failed post-condition checks to 1, and
/// everything the caller could fix by changing the input to 2.
pub fn core_status(e: &CoreError) -> Status {
    match e {
        CoreError::NoConvergence { .. } => Status::NoConvergence,
        CoreError::ResidualExceeded { .. }
        | CoreError::UnitarityFailure { .. }
        | CoreError::InvalidCertificate(_) => Status::VerificationFailed,
        _ => Status::BadInput,
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
