//! Crate-wide error type.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation
    /// (boundary base point, coincident points, parameter out of range).
    #[error("domain error: {0}")]
    Domain(String),

    /// Operation not available for this input class (e.g. second
    /// derivatives of a symbol that is only C^1).
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A configured budget (node count, sample cap) was exceeded.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Malformed configuration or symbol specification.
    #[error("bad config: {0}")]
    BadConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn bad_config(msg: impl Into<String>) -> Self {
        Error::BadConfig(msg.into())
    }
}
