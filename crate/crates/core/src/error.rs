use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("parameter domain error: {0}")]
    Domain(String),
    /// A numerical construction could not reach the requested tolerance.
    #[error("accuracy target {target:e} not reached, achieved {achieved:e}")]
    Accuracy { achieved: f64, target: f64 },
    /// The request is well formed but not supported by this implementation.
    #[error("capability error: {0}")]
    Capability(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
