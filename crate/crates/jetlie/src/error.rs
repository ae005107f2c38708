use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("specification error: {0}")]
    Specification(String),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("inconsistent: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
