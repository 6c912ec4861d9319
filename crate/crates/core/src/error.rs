use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid radius: R = {radius} must exceed the potential range R0 = {range}")]
    InvalidRadius { radius: f64, range: f64 },

    #[error("invalid trial function: {0}")]
    InvalidTrial(String),

    #[error("invalid healing scale: {0}")]
    InvalidScale(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("quadrature did not converge: relative change {relative_change:e} at order {order}")]
    Accuracy { relative_change: f64, order: usize },

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
