use thiserror::Error;

/// Errors raised by the library. Contract violations that callers can
/// reasonably trigger from user input are reported here rather than panicking.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("ground sizes differ: {0} vs {1}")]
    GroundSizeMismatch(usize, usize),

    #[error("invalid index word: {0}")]
    InvalidWord(String),

    #[error("partition {partition} is not in the {lattice} lattice")]
    LatticeMismatch { partition: String, lattice: String },

    #[error("noncommutative base: {0}")]
    NoncommutativeBase(String),

    #[error("incompatible tables: {0}")]
    IncompatibleTables(String),

    #[error("{0} exceeds the enumeration cap")]
    TooLarge(String),

    #[error("invalid sampling configuration: {0}")]
    InvalidSampling(String),

    #[error("tensor degree mismatch: expected {expected}, found {found}")]
    TensorDegree { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
