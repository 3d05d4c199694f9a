use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix too large to materialize: m = {m} exceeds {limit}")]
    TooLarge { m: u64, limit: u64 },
    #[error("vector is indexed by a different matrix or has the wrong length")]
    IndexMismatch,
    #[error("level {level} out of range for a chain with {n} factors")]
    LevelOutOfRange { level: usize, n: usize },
    #[error("dilation factor {index} has |det| = {det}, a dyadic chain needs 2")]
    NotDyadic { index: usize, det: i64 },
    #[error("congruence class {class} has vanishing power {power:e}")]
    DegenerateClass { class: usize, power: f64 },
    #[error("basis functions must be orthonormalized first")]
    NotNormalized,
    #[error("operation only defined for d = {expected}, got d = {found}")]
    UnsupportedDimension { expected: usize, found: usize },
    #[error("chain violates the successor condition at factor {index}")]
    ConditionViolated { index: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
