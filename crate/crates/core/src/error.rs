use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown function `{id}`; valid ids: {valid}")]
    UnknownFunction { id: String, valid: String },

    #[error("unknown algorithm `{id}`; valid ids: {valid}")]
    UnknownAlgorithm { id: String, valid: String },

    #[error("covariance matrix could not be repaired to a positive-definite matrix")]
    CovarianceFailure,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
