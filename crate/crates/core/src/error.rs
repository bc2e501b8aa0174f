use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("derivative order {0} is not supported (maximum is 3)")]
    UnsupportedOrder(u32),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value encountered at x = {x}")]
    NonFiniteValue { x: f64 },

    #[error("quadrature tolerance {tol:e} not reached within depth {depth}")]
    ToleranceNotReached { tol: f64, depth: u32 },

    #[error("invalid interval [{a}, {b}]: {reason}")]
    InvalidInterval { a: f64, b: f64, reason: String },

    #[error("degenerate interval: a = b = {0}")]
    DegenerateInterval(f64),

    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    #[error("{0} requires exponents")]
    MissingExponents(String),

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("invalid order n = {n} (need n >= {min})")]
    InvalidOrder { n: u32, min: u32 },

    #[error("positivity required: {0}")]
    PositivityRequired(String),

    #[error("grid needs at least {min} points, got {points}")]
    InvalidGrid { points: usize, min: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("record is not a violation (margin {0})")]
    NotAViolation(f64),

    #[error("cannot parse function spec {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn exponents(msg: impl Into<String>) -> Self {
        Error::InvalidExponents(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
