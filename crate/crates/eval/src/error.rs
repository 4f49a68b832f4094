use thiserror::Error;

#[derive(Error, Debug)]
pub enum EvalError {
    #[error(transparent)]
    Core(#[from] fractalmark_core::CoreError),

    #[error(transparent)]
    Mark(#[from] fractalmark_mark::MarkError),

    #[error("corpus is empty: {0}")]
    CorpusEmpty(String),

    #[error("unknown method: {0}")]
    MethodUnknown(String),

    #[error("need at least 2 samples per side, got {0} and {1}")]
    InsufficientSamples(usize, usize),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EvalError>;
