use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero polynomial has no multidegree")]
    ZeroPolynomial,

    #[error("moment order too small: need {needed}, sequence has {available}")]
    OrderTooSmall { needed: u32, available: u32 },

    #[error("order below minimum d̄ = {minimum} (got k = {order})")]
    OrderBelowMinimum { order: u32, minimum: u32 },

    #[error("weights must be positive and sum to 1 (sum = {0})")]
    InvalidWeights(f64),

    #[error("malformed conic problem: {0}")]
    MalformedProblem(String),

    #[error("extraction ill-conditioned: pivot {pivot:e} below threshold {threshold:e}")]
    ExtractionIllConditioned { pivot: f64, threshold: f64 },

    #[error("extraction failed: complex atoms")]
    ComplexAtoms,

    #[error("extraction failed: {0}")]
    Extraction(String),

    #[error("multipliers not unique: constraint gradients are linearly dependent")]
    MultipliersNotUnique,

    #[error("zero tensor has every rank-one approximation error ‖A‖²")]
    ZeroTensor,

    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
