use std::path::PathBuf;

use qcycle_core::{Error, ErrorClass};
use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CHECK_FAILED: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const NUMERIC: u8 = 3;
    pub const DOMAIN: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] Error),

    #[error("{failed} of {total} checks failed")]
    CheckFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => exit::CONFIG,
            CliError::Core(e) => core_exit_code(e),
            CliError::CheckFailed { .. } => exit::CHECK_FAILED,
        }
    }
}

/// Exit status of a library failure.
pub fn core_exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Invalid => exit::CONFIG,
        ErrorClass::Numeric => exit::NUMERIC,
        ErrorClass::Domain => exit::DOMAIN,
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
