//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("duplicate point `{0}`")]
    DuplicatePoint(String),
    #[error("point index {index} out of range for a model with {size} points")]
    PointOutOfRange { index: usize, size: usize },
    #[error("set over {set} points used with a model of {model} points")]
    SetSizeMismatch { set: usize, model: usize },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),

    #[error("empty point sequence")]
    EmptyPath,
    #[error("invalid path step at index {0}")]
    InvalidStep(usize),
    #[error("path length {0} exceeds the supported maximum")]
    PathTooLong(usize),
    #[error("paths have different directions")]
    DirectionMismatch,
    #[error("concatenation endpoints differ: `{0}` vs `{1}`")]
    EndpointMismatch(String, String),
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("relation is not symmetric: ({0},{1}) has no converse")]
    NotSymmetric(String, String),
    #[error("partition is not uniform for atom `{atom}` inside block {block}")]
    NonUniformBlock { atom: String, block: usize },
    #[error("partition does not cover the model")]
    PartitionMismatch,
    #[error("{0}")]
    BudgetExceeded(String),

    #[error("model has no points")]
    EmptyModel,
    #[error("model has no grid provenance")]
    NotAGrid,
    #[error("unknown color #{0} at pixel ({1},{2})")]
    UnknownColor(String, usize, usize),
    #[error("pixel buffer has {got} pixels, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("maze size {0}x{1} is too small (minimum 8x8)")]
    MazeTooSmall(usize, usize),
    #[error("maze generation failed after {0} retries")]
    MazeRetriesExhausted(usize),
    #[error("invalid palette line {0}: {1}")]
    BadPalette(usize, String),
    #[error("invalid pixmap: {0}")]
    BadPixmap(String),
    #[error("invalid model file: {0}")]
    BadModel(String),
    #[error("invalid partition file: {0}")]
    BadPartition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for malformed input text (file or formula syntax).
    pub fn is_parse(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::BadPalette(..)
                | Error::BadPixmap(..)
                | Error::BadModel(..)
                | Error::BadPartition(..)
        )
    }
}
