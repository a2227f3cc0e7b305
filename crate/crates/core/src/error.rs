use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the library, grouped so a caller can map them onto
/// process exit codes with [`Error::kind`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {field}: {message}")]
    Malformed {
        line: usize,
        field: String,
        message: String,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("corpus is empty{0}")]
    EmptyCorpus(&'static str),

    #[error("duplicate sentence_id {0:?}")]
    DuplicateSentence(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("sentence {sentence}: probability mass underflowed to zero")]
    ZeroMass { sentence: String },

    #[error("non-finite score {score} in sentence {sentence}")]
    NonFinite { sentence: String, score: f64 },

    #[error("distribution support violation at position {0}")]
    Support(usize),

    #[error("likelihood decreased at iteration {iteration}: {previous} -> {current}")]
    LikelihoodDecrease {
        iteration: usize,
        previous: f64,
        current: f64,
    },

    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Internal,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::LikelihoodDecrease { .. } | Error::Consistency(_) => ErrorKind::Internal,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(line: usize, field: impl Into<String>, message: impl ToString) -> Self {
        Error::Malformed {
            line,
            field: field.into(),
            message: message.to_string(),
        }
    }
}
