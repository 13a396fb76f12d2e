use thiserror::Error;

/// Errors raised by the arithmetic, solver and disc layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands live in different fields or ramified towers")]
    IncompatibleField,

    #[error("division by zero")]
    DivisionByZero,

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("invalid field parameters: {0}")]
    InvalidField(String),

    #[error("modulus is reducible over F_{p}")]
    ReducibleModulus { p: u32 },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("coefficient not in field: {0}")]
    CoefficientNotInField(String),

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("element is not integral (negative valuation)")]
    NotIntegral,

    #[error("multiplier is not a unit")]
    NonUnitMultiplier,

    #[error("multiplier is a root of unity")]
    RootOfUnity,

    #[error("multiplier screening undetermined at the working precision")]
    RootOfUnityUndetermined,

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("map has the wrong shape: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
