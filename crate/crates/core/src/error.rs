use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("did not converge: {0}")]
    Convergence(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("malformed header {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error("payload {path} holds {actual} bytes, header implies {expected}")]
    SizeMismatch {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("pixel index {index} outside a {height}x{width} raster")]
    OutOfBounds {
        index: usize,
        height: usize,
        width: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical routine (as opposed to bad input data).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence(_) | Error::Degenerate(_))
    }
}

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}

pub(crate) fn domain_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
