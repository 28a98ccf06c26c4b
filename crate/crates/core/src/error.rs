use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("invalid bandwidth {0}: must be finite and > 0")]
    InvalidBandwidth(f64),

    #[error("too few points: need at least {needed}, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("coordinate {coordinate} has zero variance")]
    ZeroVariance { coordinate: usize },

    #[error("density is zero or non-finite ({value}) at the evaluation point")]
    ZeroDensity { value: f64 },

    #[error("point {index}: {source}")]
    AtPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("bandwidth grid violates the admissible bound h <= {bound:.6} (offending h = {h})")]
    InadmissibleBandwidth { h: f64, bound: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_point(index: usize, source: Error) -> Self {
        Error::AtPoint {
            index,
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
