use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    /// Rejected configuration, tagged with the offending field path
    /// (e.g. `sweep[2].N`).
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV {}: {message}", path.display())]
    Csv { path: PathBuf, message: String },

    #[error(transparent)]
    Sim(#[from] sawtooth_echo::Error),

    #[error("{0}")]
    Other(String),
}

impl RunError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        RunError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for configuration problems, 2 for everything
    /// that went wrong while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config { .. } => 1,
            _ => 2,
        }
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;
