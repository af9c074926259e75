use std::io;
use std::path::PathBuf;

/// Failures of the command-line layer. Each maps to one process exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse {what}: {detail}")]
    Parse { what: String, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Core(#[from] wachfam_core::Error),
    #[error("{failed} of {total} certificates failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(what: impl Into<String>, detail: impl ToString) -> Self {
        AppError::Parse {
            what: what.into(),
            detail: detail.to_string(),
        }
    }

    /// 1 for a failed mathematical check, 2 for bad input or configuration.
    pub fn exit_code(&self) -> u8 {
        use wachfam_core::Error as E;
        match self {
            AppError::ChecksFailed { .. } => 1,
            AppError::Core(e) => match e {
                E::InvalidPrime(_)
                | E::InvalidCap(_)
                | E::Parse(_)
                | E::Precondition(_)
                | E::ShapeMismatch => 2,
                _ => 1,
            },
            AppError::Config(_) | AppError::Parse { .. } | AppError::Io { .. } => 2,
        }
    }
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;
