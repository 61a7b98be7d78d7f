use thiserror::Error;

use crate::opdsl::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible grids: {0} vs {1} samples")]
    IncompatibleGrids(usize, usize),

    #[error("grid needs at least 3 samples, got {0}")]
    GridTooSmall(usize),

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("group is empty")]
    EmptyGroup,

    #[error("group is not closed: {0}")]
    NotAGroup(String),

    #[error("unknown builtin function `{0}`")]
    UnknownBuiltin(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "power mean exponent must be >= 1 (got {0}); M_p is not a 1-Lipschitz function for p < 1"
    )]
    ExponentBelowOne(f64),

    #[error("power mean exponent must be > 0 (got {0})")]
    NonPositiveExponent(f64),

    #[error("p-norm exponent must be >= 1 or infinite (got {0})")]
    NormExponent(f64),

    #[error("arity mismatch: map takes {expected} arguments, {found} operators given")]
    ArityMismatch { expected: usize, found: usize },

    #[error("{0} does not commute with G")]
    NotCommuting(String),

    #[error("coefficients sum to {0} > 1")]
    CoefficientSum(f64),

    #[error("lower bound requires validated GENEOs (operator {0} is unchecked)")]
    UncheckedOperator(usize),

    #[error("output leaves the function space: {0}")]
    ClosureViolation(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
