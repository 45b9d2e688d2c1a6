use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid descriptor or configuration input.
    #[error("config: {0}")]
    Config(String),

    /// A (kind, dimension, submanifold) combination the artifact does not model.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An iterative numerical procedure failed to converge or to bracket.
    #[error("numerical: {0}")]
    Numerical(String),

    /// A constructed value violates one of its type invariants.
    #[error("invariant: {0}")]
    Invariant(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}
