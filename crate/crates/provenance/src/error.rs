use thiserror::Error;

#[derive(Error, Debug)]
pub enum ProvenanceError {
    #[error("feature vector is empty")]
    EmptyFeatures,

    #[error("leaf index {index} out of range for {leaves} leaves")]
    IndexOutOfRange { index: usize, leaves: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid share parameters: {0}")]
    InvalidShares(String),

    #[error("need {k} shares to reconstruct, got {got}")]
    TooFewShares { k: usize, got: usize },

    #[error("royalty basis points {0} exceed 10000")]
    BpsOutOfRange(u16),
}

pub type Result<T> = std::result::Result<T, ProvenanceError>;
