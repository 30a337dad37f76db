use std::io;
use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("class {label} has no observations")]
    EmptyClass { label: u8 },
    #[error("not a metric: {0}")]
    NonMetric(String),
    #[error("witness is not 1-Lipschitz: |f[{i}] - f[{j}]| = {diff} exceeds d({i},{j}) = {bound}")]
    NotLipschitz {
        i: usize,
        j: usize,
        diff: f64,
        bound: f64,
    },
    #[error("fold {index}: {source}")]
    Fold {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
