use pvd_core::PvdError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] PvdError),
}

impl CliError {
    /// Stable machine-readable code emitted in error reports.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.code(),
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            CliError::Parse { line, .. } => Some(*line),
            _ => None,
        }
    }
}
