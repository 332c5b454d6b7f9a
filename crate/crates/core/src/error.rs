use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian (max |M - M^H| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace}, expected 1")]
    Trace { trace: f64 },

    #[error("eigenvalue {value:.3e} is below the clipping tolerance")]
    NegativeEigenvalue { value: f64 },

    #[error("invalid probability vector: {0}")]
    ProbVec(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid channel parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {dim} exceeds the supported limit {limit} for {what}")]
    TooLarge { what: &'static str, dim: usize, limit: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid ensemble: {0}")]
    Ensemble(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
