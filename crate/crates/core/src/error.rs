use thiserror::Error;

/// Errors surfaced by the library. Infeasibility of a *candidate* input to
/// [`crate::domain::check_feasibility`] is reported as a value, not through
/// this type; the variants here mark operations that cannot proceed.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("negative duration {value} at sample index {index}")]
    NegativeSample { index: usize, value: f64 },

    #[error("degenerate sample: zero variance across {n} observations")]
    DegenerateSample { n: usize },

    #[error("infeasible statistics: {report}")]
    InfeasibleStats { report: String },

    #[error("duration {t} outside [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },

    #[error("worst-case witness undefined at t = {t}: {reason}")]
    UndefinedWitness { t: f64, reason: String },

    #[error("{l} types exceed the partition enumeration guard of {max}")]
    TooManyModes { l: usize, max: usize },

    #[error("invalid probabilities: {0}")]
    BadProbabilities(String),

    #[error("invalid parameter: {0}")]
    BadParameter(String),

    #[error("invalid partition: {0}")]
    BadPartition(String),

    #[error("mode {mode} needs at least {needed} samples, has {got}")]
    InsufficientSamples {
        mode: usize,
        needed: usize,
        got: usize,
    },

    #[error("mode {mode} has no samples to evaluate")]
    MissingSamples { mode: usize },

    #[error("capacity {capacity} too small: group {group} received no slots")]
    CapacityTooSmall { capacity: f64, group: usize },

    #[error("moment constraints infeasible on the grid: {binding}")]
    InfeasibleOnGrid { binding: String },

    #[error("linear program infeasible")]
    LpInfeasible,

    #[error("linear program unbounded")]
    LpUnbounded,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
