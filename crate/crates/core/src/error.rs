use thiserror::Error;

use crate::data::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(ValidationReport),
    #[error("no records")]
    NoRecords,
    #[error("no comparable pairs")]
    NoComparablePairs,
    #[error("risk vector has {found} entries but the dataset has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("risk value at index {index} is not finite ({value})")]
    NonFiniteRisk { index: usize, value: f64 },
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("invalid survival matrix: {0}")]
    InvalidMatrix(String),
    #[error("degenerate matrix: no strictly positive survival probability")]
    DegenerateMatrix,
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("weight scheme requires a provided censoring distribution")]
    MissingCensoringDistribution,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate range for uniform censoring: min {min} equals upper quantile {max}")]
    DegenerateCensoringRange { min: f64, max: f64 },
    #[error("stratum `{stratum}` has {size} members, fewer than k = {k}")]
    StratumTooSmall {
        stratum: &'static str,
        size: usize,
        k: usize,
    },
    #[error("all {0} bootstrap resamples failed")]
    AllResamplesFailed(usize),
    #[error("brute-force oracle is limited to {limit} subjects (got {n})")]
    OracleTooLarge { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
