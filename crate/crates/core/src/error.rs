use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operation needs at least one point")]
    EmptyInput,

    #[error("non-finite coordinate ({x}, {y})")]
    NonFinite { x: f64, y: f64 },

    #[error("block size must be at least 1")]
    InvalidBlockSize,

    #[error("exact solver is capped at {cap} terminals, got {n}")]
    ExactCapExceeded { cap: usize, n: usize },

    #[error("tree has no vertices")]
    EmptyTree,

    #[error("block graph is disconnected ({components} components)")]
    DisconnectedBlockGraph { components: usize },

    #[error("reference length must be positive, got {0}")]
    NonPositiveReference(f64),

    #[error("degree must be at least 1")]
    InvalidDegree,

    #[error("external solver `{command}` failed: {reason}")]
    External { command: String, reason: String },

    #[error("external solver `{command}` timed out after {seconds:.1}s")]
    ExternalTimeout { command: String, seconds: f64 },

    #[error("{path}: {reason}")]
    Parse { path: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown method `{label}`; valid labels: {valid}")]
    UnknownMethod { label: String, valid: String },

    #[error("{0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
