use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval: lo {lo} > hi {hi}")]
    InvalidInterval { lo: i64, hi: i64 },

    #[error("index arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: i64, value: f64 },

    #[error("invalid exponent value {value} at index {index}: must be finite and >= 1")]
    InvalidExponent { index: i64, value: f64 },

    #[error("conjugate undefined: p_- = {p_minus} is not > 1")]
    ConjugateUndefined { p_minus: f64 },

    #[error("alpha must be in [0,1), got {0}")]
    AlphaOutOfRange(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}
