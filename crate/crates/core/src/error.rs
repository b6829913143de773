use std::path::PathBuf;

use thiserror::Error;

use crate::labels::{ClassId, Dimension};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("min_count must be at least 1")]
    InvalidMinCount,

    #[error("threshold must exceed 0.5 (got {0})")]
    InvalidThreshold(f64),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("lexicon: {0}")]
    Lexicon(String),

    #[error("{source_name}:{line}: {message}")]
    MalformedRecord {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("split fractions must be positive and sum to 1 (got {0:?})")]
    InvalidFractions((f64, f64, f64)),

    #[error("model does not support dimension {0}")]
    UnsupportedDimension(Dimension),

    #[error("unsupported class {0}")]
    UnsupportedClass(ClassId),

    #[error("candidate set is empty")]
    NoCandidates,

    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("no evaluable examples: every class is empty")]
    EmptyEvaluation,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("model file version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: String, found: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure is attributable to bad input or usage rather than
    /// a runtime fault. The CLI maps these to exit code 2.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Diverged { .. })
    }
}
