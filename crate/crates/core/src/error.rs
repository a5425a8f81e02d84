use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no calibration scores")]
    NoScores,
    #[error("Hausdorff undefined for empty set")]
    EmptyRegion,
    #[error("Hausdorff requires finite endpoints")]
    UnboundedRegion,
    #[error("singular design matrix")]
    SingularDesign,
    #[error("too few rows: need at least {needed}, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("dimension mismatch: expected {expected} covariates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty HPD set")]
    EmptyHpdSet,
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
