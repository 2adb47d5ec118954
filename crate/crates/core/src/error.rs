use thiserror::Error;

use crate::graph::VertexRef;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("non-finite value at vertex {vertex}: {msg}")]
    Numeric { vertex: VertexRef, msg: String },

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("ordering error: {0}")]
    Ordering(String),

    #[error("binary format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
