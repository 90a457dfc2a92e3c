use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by every layer of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes, dimensions or config values that cannot work together.
    #[error("configuration error: {0}")]
    Config(String),

    /// NaN/Inf reached a place where only finite values are allowed.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An API was driven in the wrong order (step after done, backward without forward, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Layout sampling gave up after its retry budget.
    #[error("generation error: {0}")]
    Generation(String),

    /// A goto/touch target that does not exist in the current environment.
    #[error("unknown target `{0}`")]
    UnknownTarget(String),

    #[error("rule syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("rule error at line {line}: {message}")]
    Rule { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
