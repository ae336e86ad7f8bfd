use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared across the toolkit.
///
/// Variants map onto the CLI exit codes: configuration problems exit 2,
/// data/model problems exit 3, and training non-convergence (when configured
/// as fatal) exits 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("document structure error: {0}")]
    Html(String),

    #[error("cannot decode bubble rating from class attribute {attribute:?}")]
    BubbleDecode { attribute: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("training data contains a single class; need at least one example of each")]
    SingleClass,

    #[error("model bundle format version {found} is unsupported (this build reads version {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("preprocessing fingerprint mismatch: the stopword/negation inputs differ from the ones the model was trained with")]
    FingerprintMismatch,

    #[error("corrupt model bundle: {0}")]
    CorruptBundle(String),

    #[error("training did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn stage(stage: &'static str, source: Error) -> Self {
        Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Process exit code for this error when surfaced by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::NonConvergence { .. } => 4,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}
