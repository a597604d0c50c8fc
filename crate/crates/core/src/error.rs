use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid tree: {0}")]
    Tree(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("backend mismatch: {0}")]
    Backend(String),
    #[error("invalid dual pair: {0}")]
    Dual(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("improper scalarization: {0}")]
    Improper(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
