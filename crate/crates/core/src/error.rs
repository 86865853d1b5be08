use thiserror::Error;

use crate::arithmetic::BackendSpec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("precision of {0} bits is below the 64-bit minimum")]
    PrecisionTooLow(u32),
    #[error("precision of {0} bits exceeds the supported maximum")]
    PrecisionTooHigh(u32),
    #[error("arbitrary-precision backend requires a bit width")]
    MissingPrecision,
    #[error("only the arbitrary-precision backend takes a bit width")]
    UnexpectedPrecision,
    #[error("unknown backend tag `{0}` (expected rational, f64, f64c or apB)")]
    UnknownBackend(String),
    #[error("backend mismatch: {left} vs {right}")]
    BackendMismatch { left: BackendSpec, right: BackendSpec },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not exactly representable in the rational backend")]
    NotRepresentable(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("reference pi cross-check failed at {digits} digits: {first} vs {second}")]
    CrossValidation {
        digits: u32,
        first: String,
        second: String,
    },
    #[error("malformed scan record: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
