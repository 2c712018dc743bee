use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimensions(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid hyperparameter `{key}` for {kind}: {reason}")]
    Hyperparameter {
        kind: &'static str,
        key: String,
        reason: String,
    },
    #[error("training set contains a single class")]
    SingleClass,
    #[error("missing class {0} in annotation")]
    MissingClass(u8),
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("negative feature at row {row}, column {col}; multinomial naive Bayes needs non-negative inputs")]
    NegativeFeature { row: usize, col: usize },
    #[error("operation requires a {expected} model, got {actual}")]
    WrongKind {
        expected: &'static str,
        actual: &'static str,
    },
    #[error("need at least {k} points, got {n}")]
    TooFewPoints { n: usize, k: usize },
    #[error("truth count must be at least 1")]
    InvalidTruth,
}

pub type Result<T> = core::result::Result<T, Error>;
