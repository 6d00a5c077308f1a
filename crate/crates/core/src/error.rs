use std::io;

use thiserror::Error;

/// Errors produced anywhere in the cascade toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected {expected}x{expected}, found {found_rows}x{found_cols}")]
    Shape {
        expected: usize,
        found_rows: usize,
        found_cols: usize,
    },

    #[error("degenerate steady state: rate matrix null space has dimension {nullity}")]
    DegenerateSteadyState { nullity: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("state error: {0}")]
    State(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("channel {0} has no events")]
    EmptyChannel(u8),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {value}")))
    }
}
