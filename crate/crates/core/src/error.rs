use thiserror::Error;

/// Error type shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two distributions on different grids were combined or compared.
    #[error("grid mismatch: step {left} vs {right}")]
    GridMismatch { left: f64, right: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("unknown product id `{0}`")]
    UnknownProduct(String),

    #[error("unknown order id `{0}`")]
    UnknownOrder(String),

    /// An operator was applied in a state where it is not generated.
    #[error("operator {op} not applicable: {reason}")]
    Inapplicable { op: String, reason: String },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    /// A solve hit its expansion or wall-clock cap. Carries the best
    /// complete schedule generated so far, when one exists.
    #[error("search limit exceeded after {expansions} expansions ({elapsed:.3}s)")]
    LimitExceeded {
        expansions: u64,
        elapsed: f64,
        incumbent: Option<Box<crate::model::Schedule>>,
    },

    #[error("search invariant violated: {0}")]
    InvariantViolation(String),

    #[error("instance generation failed: {0}")]
    Generation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
