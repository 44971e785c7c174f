use thiserror::Error;

/// Error type shared by every numerical entry point of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid axis {axis} has {count} samples, which is not a power of two")]
    NonPowerOfTwoGrid { axis: usize, count: usize },

    #[error("box too small: {0}")]
    BoxTooSmall(String),

    #[error("work budget exceeded{context}: {required} terms requested, budget is {budget}")]
    BudgetExceeded {
        required: u128,
        budget: u128,
        context: String,
    },

    #[error("star variant mismatch: {0}")]
    VariantMismatch(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("{0}")]
    CheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
