use thiserror::Error;

/// Errors raised by the simulation and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not aligned to the time grid: {0}")]
    Misaligned(String),

    #[error("non-finite value at path {path}, step {step}")]
    NonFinite { path: usize, step: usize },

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("regression at node {node} is rank deficient (condition number {condition:.3e})")]
    RankDeficient { node: usize, condition: f64 },

    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
