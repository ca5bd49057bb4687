use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// A precondition on an argument was violated.
    #[error("domain error: {0}")]
    Domain(String),
    /// Not enough working precision to certify a result.
    #[error("precision error: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Domain(msg.into()))
}
