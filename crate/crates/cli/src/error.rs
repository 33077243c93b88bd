//! CLI error type and its mapping onto process exit codes.

use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration is unreadable, malformed or out of range.
    #[error("configuration error: {0}")]
    Config(String),
    /// A computation failed on a valid configuration.
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A matrix file that does not follow the text format.
    #[error("malformed matrix file: {0}")]
    Format(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Prefixes a configuration key to the message, e.g. `pump.fwhm_thz: ...`.
    pub fn key(key: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Config(format!("`{key}` {msg}"))
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Format(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

impl From<pdcshape_core::Error> for CliError {
    fn from(e: pdcshape_core::Error) -> Self {
        if e.is_config_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
