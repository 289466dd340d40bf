use std::path::PathBuf;

/// Errors raised by the library. Per-pixel failures never surface here; they
/// become invalid pixels in the output image instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("empty candidate set")]
    EmptyCandidates,

    #[error("no valid pixels to evaluate")]
    NoValidPixels,

    #[error("score undefined: tp + fp + fn = 0")]
    UndefinedScore,

    #[error("invalid scene: {0}")]
    Scene(String),

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest {path}: {msg}")]
    Manifest { path: PathBuf, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
