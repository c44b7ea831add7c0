use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("vertex {vertex} is not a client of an instance with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("invalid route plan: {0}")]
    InvalidPlan(String),

    #[error("invalid cycle cover: {0}")]
    InvalidCover(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported {keyword}: {value}")]
    Unsupported { keyword: String, value: String },

    #[error("{count} vertices to match: no perfect matching exists for an odd count")]
    OddVertexCount { count: usize },

    #[error("{what} has size {size}, above the limit of {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
