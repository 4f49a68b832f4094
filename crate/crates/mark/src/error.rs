use thiserror::Error;

#[derive(Error, Debug)]
pub enum MarkError {
    #[error(transparent)]
    Core(#[from] fractalmark_core::CoreError),

    #[error("image admits only {blocks} blocks, need at least 4")]
    TooFewBlocks { blocks: usize },

    #[error("receipt does not match the supplied config")]
    ReceiptMismatch,

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, MarkError>;
