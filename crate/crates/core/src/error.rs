use thiserror::Error;

/// Errors raised by the moment engine.
#[derive(Debug, Error)]
pub enum Error {
    /// An enumeration or summation would exceed a configured resource cap.
    #[error("resource cap exceeded: {what} requested {requested}, cap is {cap}")]
    ResourceCap {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    /// A documented precondition of an operation does not hold.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Two independent evaluation routes disagree.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::ContractViolation(msg.into()))
}
