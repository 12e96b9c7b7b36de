use thiserror::Error;

/// Errors surfaced by every layer of the verification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("insufficient sample: {0}")]
    InsufficientSample(String),

    #[error("unknown basis family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("unknown demo `{0}`")]
    UnknownDemo(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
