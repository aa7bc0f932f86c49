//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by any stage of the correspondence pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed image: {0}")]
    MalformedImage(String),

    #[error("invalid gaussian sigma {0}, must be > 0")]
    InvalidSigma(f32),

    #[error("image too small: {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("image too small to downsample: {width}x{height}")]
    TooSmall { width: usize, height: usize },

    #[error("keypoint list is empty")]
    EmptyKeypoints,

    #[error("match ratio {0} outside (0, 1)")]
    InvalidRatio(f32),

    #[error("every RANSAC sample was degenerate")]
    DegenerateConfiguration,

    #[error("point ({x}, {y}) outside image {width}x{height}")]
    OutOfBounds {
        x: f32,
        y: f32,
        width: usize,
        height: usize,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("no reference distribution matches attention resolution {nq}x{nk}")]
    ResolutionMismatch { nq: usize, nk: usize },

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("reference attention has no supervised queries")]
    NoSupervisedQueries,

    #[error("query index {index} out of range (Nq = {nq})")]
    IndexOutOfRange { index: usize, nq: usize },

    #[error("finite-difference step must be > 0")]
    InvalidStep,

    #[error("parse error in {path}: {message}")]
    ParseError { path: String, message: String },

    #[error("missing dataset directory: {0}")]
    MissingDirectory(PathBuf),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
