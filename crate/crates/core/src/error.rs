use alloc::vec::Vec;

/// Errors raised at operation boundaries.
///
/// Out-of-support likelihood evaluations are not errors: they return `-inf`
/// so that samplers reject the offending proposal.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("probability {0} is outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("data set is empty")]
    EmptyData,
    #[error("series of length {len} is too short for an AR({p}) likelihood")]
    SeriesTooShort { len: usize, p: usize },
    #[error("AR coefficients are not stationary")]
    NonStationary,
    #[error("AR coefficients sum to one, the stationary mean is undefined")]
    UnitRootSum,
    #[error("expected a vector of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("observation outside the support of the model")]
    OutOfSupport,
    #[error("matrix is not positive definite (leading minor {minor} fails)")]
    NotPositiveDefinite { minor: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("initial position is outside the support of the target")]
    InitOutOfSupport,
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("chain has zero variance")]
    ZeroVariance,
    #[error("chain of length {len} is too short (need at least {needed})")]
    ChainTooShort { len: usize, needed: usize },
    #[error(
        "MAP search left the support on every line-search attempt after {iterations} iterations"
    )]
    MapFailed { iterations: usize, last: Vec<f64> },
}

pub type Result<T> = core::result::Result<T, Error>;
