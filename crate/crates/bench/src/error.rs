use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;
use crate::dataset::DatasetError;

/// Process exit status contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitCode {
    Success = 0,
    ValidationFailures = 1,
    Config = 2,
    Io = 3,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("client failure on {instance_id}: {message}")]
    Client {
        instance_id: String,
        message: String,
    },
    #[error("{0}")]
    Metrics(#[from] multipath_core::metrics::MetricsError),
    #[error("{0}")]
    Usage(String),
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            BenchError::Config(_) | BenchError::Usage(_) | BenchError::Metrics(_) => {
                ExitCode::Config
            }
            BenchError::Dataset(_) | BenchError::Io { .. } | BenchError::Client { .. } => {
                ExitCode::Io
            }
        }
    }
}
