use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid combinatorial map: {0}")]
    InvalidMap(String),

    #[error("invalid edge partition: {0}")]
    InvalidPartition(String),

    #[error("invalid lattice path: {0}")]
    InvalidPath(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("resource guard exceeded: {0}")]
    Resource(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
