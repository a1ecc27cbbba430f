//! Error type for the IO/CLI layer, mapped onto the process exit codes:
//! 2 usage/config, 3 I/O, 4 capacity.

use contact_core::CoreError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: validation error: {message}")]
    Validation {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error(transparent)]
    Core(CoreError),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::Io { .. } | SimError::Parse { .. } | SimError::Validation { .. } => 3,
            SimError::Capacity(_) => 4,
            SimError::Core(e) => match e {
                CoreError::Capacity { .. } => 4,
                _ => 2,
            },
        }
    }
}

impl From<CoreError> for SimError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Capacity { what, limit } => {
                SimError::Capacity(format!("{what} (limit {limit})"))
            }
            other => SimError::Core(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
