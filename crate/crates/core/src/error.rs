use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime below 2^32")]
    InvalidModulus(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("linear system is inconsistent or underdetermined")]
    Unsolvable,
    #[error("evaluation points must be distinct and nonzero")]
    BadEvaluationPoints,
    #[error("invalid code parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("node {0} is unreachable")]
    Unreachable(usize),
    #[error("code setup failed: {0}")]
    SetupFailed(String),
    #[error("file violates a parity check")]
    ParityViolation,
    #[error("repair failed: {0}")]
    RepairFailed(String),
    #[error("decoding failed: {0}")]
    DecodeFailed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
