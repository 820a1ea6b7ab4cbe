use std::path::PathBuf;

use cal_core::CalError;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(CalError),

    /// A post-condition of the experiment did not hold; the report is
    /// still written.
    #[error("check failed: {0}")]
    Check(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(location: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Numerical(_) | CliError::Check(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<CalError> for CliError {
    /// Errors from the library that stem from bad inputs count as config
    /// errors; the rest are numerical failures.
    fn from(e: CalError) -> Self {
        match e {
            CalError::NonFinite { .. }
            | CalError::SingularSystem { .. }
            | CalError::ConfluentRoots { .. }
            | CalError::DegenerateMass
            | CalError::DivisionByZero(_) => CliError::Numerical(e),
            other => CliError::config("run", other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
