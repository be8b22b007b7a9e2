use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("LAS error at byte offset {offset}: {message}")]
    Las { offset: u64, message: String },

    #[error("point {id} has a non-finite coordinate")]
    NonFinite { id: usize },

    #[error("points {first} and {second} share the same horizontal position")]
    DuplicatePoint { first: usize, second: usize },

    #[error("segment {seg_id} has zero horizontal length")]
    DegenerateSegment { seg_id: usize },

    #[error("no ground seeds could be selected")]
    SeedFailure,

    #[error("patch is degenerate: {0}")]
    DegeneratePatch(String),

    #[error("point spacing must be positive, got {0}")]
    InvalidSpacing(f64),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("invalid parameter {name}: {message}")]
    InvalidParam { name: &'static str, message: String },

    #[error("invalid scene spec: {0}")]
    InvalidScene(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
