use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("{what}: argument {value} is outside the domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("covariance is not symmetric (relative asymmetry {deviation:e})")]
    Asymmetric { deviation: f64 },

    #[error("covariance is not positive definite")]
    NotPositiveDefinite,

    #[error("condition number {condition:e} exceeds the limit {limit:e}")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("matrix or vector contains a non-finite entry")]
    NonFinite,

    #[error("{0}")]
    Numerical(String),

    #[error("{what}: result underflows double precision at argument {value}")]
    Underflow { what: &'static str, value: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("invalid document: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        expected,
    }
}
