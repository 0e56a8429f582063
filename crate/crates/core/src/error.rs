use thiserror::Error;

/// Errors produced by the geometry, measure and factorization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("simplex pivot limit of {limit} reached")]
    CycleLimitExceeded { limit: usize },

    #[error("scale limit exceeded: {0}")]
    ScaleLimit(String),

    #[error("vector is not in the span of the body (gauge is infinite)")]
    NotInCarrier,

    #[error("series needs {needed} terms but the cap is {cap}")]
    NonConvergent { needed: usize, cap: usize },

    #[error("operator is zero")]
    ZeroOperator,

    #[error("vector measure is identically zero")]
    ZeroMeasure,

    #[error("oracle disagreement in {what}: {first} vs {second}")]
    OracleDisagreement {
        what: &'static str,
        first: f64,
        second: f64,
    },

    #[error("no admissible functional found after {attempts} attempts")]
    SearchExhausted { attempts: usize },

    #[error("scalar measure is not a control measure (atom {atom} is null for it but not for the vector measure)")]
    NotControlMeasure { atom: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear program failed: {0}")]
    LpFailure(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
