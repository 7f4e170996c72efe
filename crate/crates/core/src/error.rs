use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("point {point:?} lies outside [0, {delta})^{dim}")]
    OutOfDomain { point: Vec<i64>, delta: i64, dim: usize },
    #[error("size mismatch: |R| = {red}, |B| = {blue}")]
    SizeMismatch { red: usize, blue: usize },
    #[error("rank {k} out of range 1..={count}")]
    RankOutOfRange { k: u64, count: u64 },
    #[error("operation requires a non-empty point set")]
    EmptySet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("input of size {n} exceeds the baseline cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("infeasible construction: {0}")]
    Infeasible(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
