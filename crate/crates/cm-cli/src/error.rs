use serde::Serialize;
use thiserror::Error;

use crate::config::ConfigError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] crowley_martin::Error),
    #[error("invariant violated: {}", .0.join("; "))]
    Invariant(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crowley_martin::Error as E;
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Model(e) => match e {
                E::InvalidParameter { .. }
                | E::InvalidGrid { .. }
                | E::LengthMismatch { .. }
                | E::NonpositiveInitialData { .. }
                | E::LimitDomain(_) => EXIT_USAGE,
                _ => EXIT_NUMERICAL,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Model(_) => match self.exit_code() {
                EXIT_USAGE => "invalid_input",
                _ => "numerical",
            },
            CliError::Invariant(_) => "invariant",
        }
    }
}

/// Machine-readable error emitted on stderr and as `error.json`.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: ErrorBody,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl From<&CliError> for ErrorReport {
    fn from(e: &CliError) -> Self {
        ErrorReport {
            error: ErrorBody {
                kind: e.kind(),
                message: e.to_string(),
                exit_code: e.exit_code(),
            },
        }
    }
}
