use std::path::PathBuf;

use asym_core::error::Error as CoreError;
use asym_core::integrate::AbortReason;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("invalid arguments: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Math(CoreError),

    #[error("integration aborted at t = {t_abort}: {reason}")]
    Aborted { reason: AbortReason, t_abort: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Schema(_) | CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Math(_) => 3,
            CliError::Aborted { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Schema(_) => "schema",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Math(_) => "math",
            CliError::Aborted { .. } => "aborted",
        }
    }
}

/// Input-shaped core failures are the caller's fault (exit 2); the rest are
/// mathematical (exit 3).
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain(m) | CoreError::InvalidConfig(m) => CliError::Usage(m),
            e @ (CoreError::Truncated { .. } | CoreError::InsufficientData { .. }) => CliError::Usage(e.to_string()),
            CoreError::MalformedOperator(m) => CliError::Schema(m),
            e => CliError::Math(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
