//! CLI error type and its mapping to exit codes.

use thiserror::Error;

/// Failures of one CLI invocation.
#[derive(Debug, Error)]
pub enum CliError {
    /// A config file that does not parse or match the schema.
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    /// Inconsistent flags or an invalid environment.
    #[error("{0}")]
    Usage(String),
    /// A numerical or builder failure, reported verbatim.
    #[error(transparent)]
    Model(#[from] latticeweak::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// `2` for bad input, `1` for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } | CliError::Usage(_) => 2,
            CliError::Model(_) | CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
