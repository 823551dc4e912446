//! CLI error kinds mapped onto exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration problems: unreadable file, schema violation, bad values.
    /// Exit code 2.
    #[error("config error: {0}")]
    Config(String),

    /// Numeric or runtime failure during execution. Exit code 3.
    #[error("run failed: {0}")]
    Numeric(String),

    /// Missing or corrupt artifacts. Exit code 3.
    #[error("artifact error: {0}")]
    Artifacts(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Artifacts(_) => 3,
        }
    }
}

impl From<qremlab::Error> for CliError {
    fn from(e: qremlab::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
