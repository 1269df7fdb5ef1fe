//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A quadrature or extrapolation could not reach the requested tolerance.
    #[error("tolerance not reached in {context}: estimated error {achieved:.3e} > requested {requested:.3e}")]
    Tolerance {
        context: String,
        achieved: f64,
        requested: f64,
    },

    /// A signal or spectrum failed one of the convolution admissibility conditions.
    #[error("admissibility condition {condition} violated: {detail}")]
    Admissibility { condition: String, detail: String },

    /// The time history is too short for a memory integral.
    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    /// A propagation guard (norm drift, translation step, runaway velocity) tripped.
    #[error("propagation aborted: {0}")]
    Propagation(String),

    /// A divergence-law or rate fit did not meet its quality bound.
    #[error("fit failure: {0}")]
    Fit(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
