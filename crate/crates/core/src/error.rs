use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate state: all Majorana polynomial coefficients vanish")]
    DegenerateState,

    #[error("complexity limit exceeded: {required} elementary terms requested, budget is {budget}")]
    ComplexityLimit { required: u128, budget: u128 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("insufficient data: {available} records, at least {required} required")]
    InsufficientData { available: usize, required: usize },

    #[error("reference GME {0:e} is below the exclusion threshold")]
    NearZeroReference(f64),

    #[error("empty input")]
    EmptyInput,

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
