use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a probability vector needs at least two entries, got {0}")]
    EmptyOrSingleton(usize),
    #[error("entry {index} is negative or not finite ({value})")]
    NegativeEntry { index: usize, value: f64 },
    #[error("entries sum to zero")]
    ZeroSum,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("point lies on the simplex boundary")]
    BoundaryPoint,
    #[error("computation produced a non-finite value")]
    NonFinite,
    #[error("delta must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("mean vector component {0} is zero")]
    ZeroMeanComponent(usize),
    #[error("data set is empty")]
    EmptyData,
    #[error("partition cell {0} has zero base mass")]
    ZeroMassCell(usize),
    #[error("partition edges must be strictly increasing")]
    UnsortedEdges,
    #[error("count {n} is inconsistent with the empirical masses")]
    InconsistentCount { n: u64 },
    #[error("draw has no atoms")]
    EmptyDraw,
    #[error("at least {required} draws are required, got {actual}")]
    InsufficientDraws { required: usize, actual: usize },
    #[error("arm `{0}` has no observations")]
    EmptyArm(&'static str),
    #[error("at least {required} observations are required, got {actual}")]
    TooFewObservations { required: usize, actual: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
