use std::path::{Path, PathBuf};

/// Errors surfaced by the file formats, the study harness and the CLI.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    /// A numerical failure outside the core error set, e.g. no usable
    /// metric at the MAP.
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Model(#[from] gevmc_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, AppError>;

impl AppError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, line: u64, message: impl Into<String>) -> Self {
        AppError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    /// 0 success, 1 usage or parse error, 2 numerical failure, 3 I/O error.
    pub fn exit_code(&self) -> i32 {
        use gevmc_core::Error as E;
        match self {
            AppError::Usage(_) | AppError::Parse { .. } => 1,
            AppError::Numerical(_) => 2,
            AppError::Model(e) => match e {
                E::NotPositiveDefinite { .. }
                | E::Singular
                | E::MapFailed { .. }
                | E::InitOutOfSupport
                | E::ZeroVariance
                | E::ChainTooShort { .. } => 2,
                _ => 1,
            },
            AppError::Io { .. } | AppError::Json { .. } => 3,
        }
    }
}
