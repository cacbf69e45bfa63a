use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite gradient in parameter `{param}`")]
    NonFiniteGradient { param: String },

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("{layer}: backward called before forward")]
    BackwardBeforeForward { layer: &'static str },

    #[error("IDX parse error in {path} at byte {offset}: {reason}")]
    Idx { path: PathBuf, offset: u64, reason: String },

    #[error("CSV parse error in {path} at line {line}: {reason}")]
    Csv { path: PathBuf, line: u64, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint version mismatch: expected {expected}, found {found}")]
    CheckpointVersion { expected: u32, found: String },

    #[error("checkpoint truncated: {0}")]
    CheckpointTruncated(String),

    #[error("checkpoint checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    CheckpointChecksum { stored: u32, computed: u32 },

    #[error("checkpoint format error: {0}")]
    CheckpointFormat(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// `fs::read` with the path in the error message.
pub(crate) fn read_file(path: &std::path::Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot read {}: {e}", path.display()),
        ))
    })
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ShapeMismatch { .. } => "shape",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NonFiniteGradient { .. } => "non-finite-gradient",
            Error::NonFiniteLoss { .. } => "non-finite-loss",
            Error::BackwardBeforeForward { .. } => "backward-before-forward",
            Error::Idx { .. } => "idx",
            Error::Csv { .. } => "csv",
            Error::Config(_) => "config",
            Error::CheckpointVersion { .. } => "checkpoint-version",
            Error::CheckpointTruncated(_) => "checkpoint-truncated",
            Error::CheckpointChecksum { .. } => "checkpoint-checksum",
            Error::CheckpointFormat(_) => "checkpoint-format",
            Error::Io(_) => "io",
        }
    }
}
