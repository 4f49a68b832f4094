use thiserror::Error;

#[derive(Error, Debug)]
pub enum CoreError {
    #[error("image too small: {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall { width: usize, height: usize, min: usize },

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("invalid image data: {0}")]
    InvalidImage(String),

    #[error("block is not square: {rows}x{cols}")]
    NonSquareBlock { rows: usize, cols: usize },

    #[error("too many decomposition levels: {levels} for {width}x{height}")]
    TooManyLevels { levels: usize, width: usize, height: usize },

    #[error("binary mask is empty")]
    EmptyMask,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("measure not normalized: |sum - 1| = {0:e}")]
    UnnormalizedMeasure(f64),

    #[error("q grid contains a point within 1e-6 of q = 1 (q = {0})")]
    QNearUnity(f64),

    #[error("q grid too small or non-uniform: {0}")]
    GridTooSmall(String),

    #[error("codec failure: {0}")]
    Codec(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
