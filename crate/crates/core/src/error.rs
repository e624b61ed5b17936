use thiserror::Error;

/// Library-wide error type.
///
/// `Domain` means a mathematically invalid input (zero inverse, singular
/// matrix, bad characteristic). `Usage` means a malformed request (mismatched
/// field specs, unknown table name). `Resource` carries the partial state
/// count reached when an enumeration blew its memory budget.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("resource budget exceeded: {partial} states found, budget {budget}")]
    Resource { partial: u64, budget: u64 },
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
