//! Error type shared by the whole crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// `Structural` signals malformed data (non-composable paths, inconsistent
/// involutions, schema violations); `Domain` signals a precondition failure
/// on well-formed data (e.g. an open path where a loop is required);
/// `Numeric` signals an iteration that did not converge within its cap;
/// `Cap` signals a resource cap (length or expansion budget) that was
/// exhausted before an answer could be produced.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("cap exhausted: {0}")]
    Cap(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn cap(msg: impl Into<String>) -> Self {
        Error::Cap(msg.into())
    }
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
