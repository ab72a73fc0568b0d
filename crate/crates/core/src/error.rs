use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A point lies outside the domain an operation requires (cone boundary,
    /// non-cone point, non-finite value, wrong space).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An orbit left the domain of the operator at iteration `k`.
    #[error("orbit left the domain at iteration {k}: {reason}")]
    DomainEscape { k: usize, reason: String },

    #[error("weight matrix has no finite cycle")]
    NoCycle,

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
