use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while configuring or running a simulation.
#[derive(Debug, Error)]
pub enum SimError {
    /// A configuration value is missing, malformed or out of range.
    #[error("invalid configuration for `{key}`: {message}")]
    Config { key: String, message: String },

    /// A primitive was evaluated outside its domain (e.g. a non-positive distance).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        SimError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the `sim` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config { .. } | SimError::Domain(_) => 2,
            SimError::Io { .. } => 3,
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
