use thiserror::Error;

/// Errors raised by oracles, constraint models and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("negative entry {value} at coordinate {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("element index {index} out of range for ground set of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("family is not laminar: sets {first} and {second} overlap without nesting")]
    NotLaminar { first: usize, second: usize },

    #[error("column {column} of the constraint matrix is all zero")]
    ZeroColumn { column: usize },

    #[error("all singleton values are zero")]
    TrivialInstance,

    #[error("instance too large for {method}: n = {n}, limit {limit}")]
    TooLarge {
        method: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("exchange procedure exceeded {limit} steps")]
    StepLimit { limit: usize },

    #[error("internal invariant broken: {0}")]
    Internal(String),

    #[error("every guess was rejected")]
    AllGuessesRejected,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub(crate) fn check_nonnegative(x: &[f64]) -> Result<()> {
    for (index, &value) in x.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeEntry { index, value });
        }
    }
    Ok(())
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.05) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("{eps} is outside the supported range (0, 0.05]"),
        });
    }
    Ok(())
}
