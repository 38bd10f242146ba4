use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("value out of bounds: {0}")]
    OutOfBounds(String),
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("no successful trials to summarize")]
    NoSuccessfulTrials,
    #[error("{0}")]
    Runtime(String),
}

impl Error {
    pub fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field: field.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
