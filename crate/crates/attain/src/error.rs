use thiserror::Error;

/// Errors raised by measure primitives, lifts, reduction steps, the
/// iteration driver, and instance I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point set must contain at least one point")]
    EmptyPointSet,
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("weight {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("incompatible spaces: length {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("phase grid needs at least 4 points, got {0}")]
    GridTooCoarse(usize),
    #[error("field must contain at least one row")]
    EmptyField,
    #[error("index set is empty")]
    EmptyIndexSet,
    #[error("row index {index} out of range for {size} rows")]
    RowOutOfRange { index: usize, size: usize },
    #[error("zero field has no peak row")]
    ZeroField,
    #[error("witness exceeds the unit ball: sup modulus {0}")]
    WitnessExceedsBall(f64),
    #[error("cannot normalize entry {index} to unit modulus")]
    ZeroEntry { index: usize },
    #[error("delta must be positive, got {0}")]
    InvalidDelta(f64),
    #[error("contraction ratio must lie in (1/2, 1), got {0}")]
    InvalidRatio(f64),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("parameter chain violated: {reason}")]
    InvalidParams { reason: String },
    #[error("{arcs} arcs are too coarse, need at least {required}")]
    ArcsTooCoarse { arcs: usize, required: usize },
    #[error("norm level {level} lies below the field norm {field_norm}")]
    NormLevelTooLow { level: f64, field_norm: f64 },
    #[error("hypothesis fails at row {row}: slack {slack:e}")]
    HypothesisViolated { row: usize, slack: f64 },
    #[error("case {case} precondition fails: {reason}")]
    CasePrecondition { case: u8, reason: String },
    #[error("certificate '{name}' failed: lhs {lhs:e}, rhs {rhs:e}, slack {slack:e}")]
    CertificateFailed {
        name: String,
        lhs: f64,
        rhs: f64,
        slack: f64,
    },
    #[error("step {step}: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("perturbation budget {budget:e} does not stay below rho {rho:e}")]
    BudgetExceeded { budget: f64, rho: f64 },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
