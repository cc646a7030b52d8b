use thiserror::Error;

/// Errors raised by sanitizers, release pipelines, inference combination and
/// the verification tooling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("privacy budget exceeded: composed cost {composed} would exceed total {total}")]
    OverBudget { composed: f64, total: f64 },

    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("sensitivity must be positive, got {0}")]
    NonPositiveSensitivity(f64),

    #[error("budget weights must sum to 1, got {0}")]
    WeightSumInvalid(f64),

    #[error("budget weight must be nonnegative, got {0}")]
    NegativeWeight(f64),

    #[error("sample size must be at least 1")]
    InvalidSampleSize,

    #[error("bounds must satisfy lower < upper and be finite, got [{lower}, {upper}]")]
    InvalidBounds { lower: f64, upper: f64 },

    #[error("statistic {value} lies outside declared bounds [{lower}, {upper}]")]
    StatOutOfBounds { value: f64, lower: f64, upper: f64 },

    #[error("candidate set must be nonempty")]
    EmptyCandidates,

    #[error("score sensitivity must be positive, got {0}")]
    NonPositiveScoreSensitivity(f64),

    #[error("dataset must contain at least one record")]
    EmptyDataset,

    #[error("record {value} lies outside declared bounds [{lower}, {upper}]")]
    ValueOutOfBounds { value: f64, lower: f64, upper: f64 },

    #[error("domain size {n} exceeds the tractable enumeration limit {limit}")]
    DomainTooLarge { n: usize, limit: usize },

    #[error("combination requires at least two releases, got {0}")]
    TooFewReleases(usize),

    #[error("length mismatch: {left} estimates vs {right} variances")]
    LengthMismatch { left: usize, right: usize },

    #[error("nested decomposition requires a balanced (m x t) grid with m >= 2 and t >= 2")]
    UnbalancedGrid,

    #[error("probability must lie strictly between 0 and 1, got {0}")]
    InvalidProbability(f64),

    #[error("degrees of freedom must be positive, got {0}")]
    InvalidDegreesOfFreedom(f64),

    #[error("variance must be nonnegative and finite, got {0}")]
    NegativeVariance(f64),

    #[error("invalid channel kernel: {0}")]
    InvalidKernel(String),

    #[error("mechanism {0} is not supported for exact discrete verification")]
    UnsupportedMechanism(&'static str),

    #[error("invalid release plan: {0}")]
    InvalidPlan(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("statistic vector element {index} has no declared bounds")]
    MissingBounds { index: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
