use thiserror::Error;

/// Errors raised by every module of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("data error: {0}")]
    Data(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown source tag {tag:?} on line {line}")]
    UnknownTag { line: usize, tag: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("index {index} out of range for length {len}")]
    Range { index: usize, len: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    /// True for failures caused by malformed or unreadable input data.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Format(_)
                | Error::Truncated { .. }
                | Error::Data(_)
                | Error::Parse { .. }
                | Error::UnknownTag { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
