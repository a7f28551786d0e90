use std::path::PathBuf;

use thiserror::Error;

/// Failure of a command, mapped to a process exit code.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing files in {dir}: {missing}", missing = .missing.join(", "))]
    MissingFiles { dir: PathBuf, missing: Vec<String> },
    #[error("numerical: {0}")]
    Numerical(#[from] biphoton_core::Error),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Io { .. } | AppError::MissingFiles { .. } => 3,
            AppError::Numerical(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        AppError::Config(msg.into())
    }
}

pub type AppResult<T> = Result<T, AppError>;
