use thiserror::Error;

/// Errors raised by the clustering toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cluster {0} has no members")]
    EmptyCluster(usize),

    #[error("label {label} at position {index} is out of range for k = {k}")]
    BadLabel { index: usize, label: usize, k: usize },

    #[error("matrix is rank deficient: smallest singular value {smallest:e} vs largest {largest:e}")]
    RankDeficient { smallest: f64, largest: f64 },

    #[error("cannot form {k} clusters from {n} objects")]
    InfeasibleK { n: usize, k: usize },

    #[error("row {0} has a zero maximum")]
    ZeroRow(usize),

    #[error("vertex {0} has no neighbors in the similarity graph")]
    IsolatedVertex(usize),

    #[error("eigensolver failed: {0}")]
    EigSolverFailure(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
