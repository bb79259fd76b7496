use thiserror::Error;

/// Errors raised by the numerical layers and by config/report decoding.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must lie in (0, 1), got {value}")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("unknown potential family `{0}`")]
    UnknownPotential(String),

    #[error("unknown convex test `{0}`")]
    UnknownConvexTest(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("log-mixture constraint p/sqrt(a) + q/sqrt(b) = 1 violated (residual {0:e})")]
    MixtureConstraint(f64),

    #[error("slope map derivative must be positive: k'({x}) = {slope}")]
    NonPositiveSlope { x: f64, slope: f64 },

    #[error("slope bound violated at {count} grid point(s); worst at x = {worst_x} with k' = {worst_slope}")]
    SlopeBoundViolation {
        count: usize,
        worst_x: f64,
        worst_slope: f64,
    },

    #[error("normalizer diverges: {0}")]
    DivergentNormalizer(String),

    #[error("potential is not finite at x = {0}")]
    NonFinitePotential(f64),

    #[error("potential `{0}` is not convex")]
    NonConvex(String),

    #[error("variance {var_x} exceeds reference variance {reference}")]
    VarianceExceedsReference { var_x: f64, reference: f64 },

    #[error("Hölder exponent must exceed 1, got {0}")]
    InvalidExponent(f64),

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("ensemble was simulated for `{ensemble}` but the transport is `{transport}`")]
    ProvenanceMismatch { ensemble: String, transport: String },

    #[error("divergent reconstruction integral at x = {0}")]
    DivergentReconstruction(f64),

    #[error("config: {0}")]
    Config(String),

    #[error("csv line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("report: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
