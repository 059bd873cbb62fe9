use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while reading or writing model checkpoints.
#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("bad magic bytes: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("unsupported checkpoint version {found} (supported: {supported})")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("payload length mismatch: manifest declares {expected} values, file holds {found}")]
    PayloadLength { expected: usize, found: usize },
    #[error("malformed manifest: {0}")]
    Manifest(String),
    #[error("model kind mismatch: expected {expected}, found {found}")]
    ModelKind { expected: String, found: String },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Record { line: usize, msg: String },
    #[error("corpus: {0}")]
    Corpus(String),
    #[error("vocabulary: {0}")]
    Vocab(String),
    #[error("lexicon: {0}")]
    Lexicon(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArg(String),
    #[error("non-finite loss: {0}")]
    NonFinite(String),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("evaluation: {0}")]
    Eval(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
