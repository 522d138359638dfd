use std::io;
use std::path::PathBuf;

/// Errors of the command-line layer. Each maps to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] ndrt_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 1 for invalid input, 2 for IO and file format problems, 3 when a
    /// verification check fails.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) | Self::Core(_) => 1,
            Self::Io { .. } | Self::Format { .. } => 2,
            Self::Verification(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
