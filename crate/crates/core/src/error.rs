use thiserror::Error;

/// Errors produced while validating data, configuring learners, or training.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("row {row}: treatment must be ±1")]
    InvalidTreatment { row: usize },
    #[error("row {row}: outcome must be ±1")]
    InvalidOutcome { row: usize },
    #[error("row {row}: feature {col} is not finite")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("propensity {value} outside the open interval (0, 1)")]
    PropensityOutOfRange { value: f64 },
    #[error("propensity has {found} entries for {expected} rows")]
    PropensityLength { expected: usize, found: usize },
    #[error("row index {index} out of range for {len} rows")]
    RowOutOfRange { index: usize, len: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("theta {0} outside [0, 1]")]
    InvalidTheta(f64),
    #[error("single-class input: {0}")]
    SingleClass(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig(_) | Error::InvalidTheta(_) => ErrorKind::Usage,
            Error::Numeric(_) => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
