use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lattice index {k} outside [{lo}, {hi}]")]
    IndexOutOfRange { k: isize, lo: isize, hi: isize },

    #[error("operands live on different lattices")]
    LatticeMismatch,

    #[error("no sample for lattice index {0}")]
    MissingSample(isize),

    /// Double precision cannot certify the value: the ratio of the
    /// largest intermediate magnitude to the result exceeded the bound.
    #[error("cancellation: condition number {condition:.3e} exceeds {limit:.1e}")]
    Cancellation { condition: f64, limit: f64 },

    #[error("no sign change found for zero #{m} after {expansions} bracket expansions")]
    NoBracket { m: usize, expansions: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("zero near lambda = {lambda} has vanishing derivative {omega_prime:.3e}")]
    MissedZero { lambda: f64, omega_prime: f64 },

    #[error("norming constant for eigenvalue n = {n} is not positive ({value:.6e})")]
    NegativeNorm { n: i32, value: f64 },

    #[error("sampling series needs |n| <= {requested}; index {missing} is not available")]
    InsufficientSamples { requested: usize, missing: i32 },

    #[error("parse error at byte {offset}: expected {}", expected.join(" or "))]
    Parse {
        offset: usize,
        expected: Vec<String>,
    },

    #[error("division by zero")]
    DivZero,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
