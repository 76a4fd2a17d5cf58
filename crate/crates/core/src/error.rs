use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("strategy length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid Hamming radius {radius} for strategies of length {len} (need 0 < C <= N)")]
    InvalidRadius { radius: usize, len: usize },

    #[error("decision index {index} out of range for strategy of length {len}")]
    PositionOutOfRange { index: usize, len: usize },

    #[error("strategy length {0} unsupported (must be 1..={max})", max = crate::bitspace::MAX_LEN)]
    UnsupportedLength(usize),

    #[error("invalid strategy string {0:?}")]
    ParseStrategy(String),

    #[error("correlation {rho} outside the valid range [{min}, 1] for order {order}")]
    InvalidCorrelation { rho: f64, min: f64, order: usize },

    #[error("matrix is not positive semi-definite (pivot {pivot} at column {column})")]
    NotPositiveSemidefinite { pivot: f64, column: usize },

    #[error("interaction degree K={k} out of range for N={n}")]
    InvalidInteractionDegree { n: usize, k: usize },

    #[error("invalid scenario parameter `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
