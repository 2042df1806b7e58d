//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes surfaced by the library.
///
/// Degenerate *data* inside an otherwise valid computation (e.g. a word pair
/// with zero feature variance inside an RSM) is handled in place and recorded
/// on the result; these variants cover inputs the caller must fix.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {required} samples, got {actual}")]
    InsufficientSamples { required: usize, actual: usize },

    #[error("correlation is undefined for a constant series")]
    ConstantSeries,

    #[error("paired differences have zero variance")]
    ZeroVariance,

    #[error("set operation requires non-empty sets")]
    EmptySet,

    #[error("feature subset must contain at least 2 features, got {0}")]
    SubsetTooSmall(usize),

    #[error("need at least {required} words, got {actual}")]
    TooFewWords { required: usize, actual: usize },

    #[error("similarity value missing for word pair ({0}, {1})")]
    MissingPair(usize, usize),

    #[error("word not found: {0}")]
    UnknownWord(String),

    #[error("corpus contains no tokens")]
    EmptyCorpus,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("regression rank deficient: only {achieved} of {requested} components extractable")]
    RankDeficient { requested: usize, achieved: usize },

    #[error("k = {k} exceeds the number of available features ({available})")]
    KTooLarge { k: usize, available: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
