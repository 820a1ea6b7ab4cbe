use thiserror::Error;

pub type Result<T> = std::result::Result<T, CalError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalError {
    /// μ = 0: the fourth-order equation cannot be solved for q⁽⁴⁾; use the
    /// second-order gradient-flow mode instead.
    #[error("degenerate mass coefficient (mu = 0); use the gradient-flow mode")]
    DegenerateMass,

    #[error("theta must be strictly positive, got {0}")]
    InvalidTheta(f64),

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),

    #[error("rho must be strictly positive, got {0}")]
    InvalidRho(f64),

    #[error("epsilon must be strictly positive, got {0}")]
    InvalidEpsilon(f64),

    #[error("dimension mismatch: expected {expected}, got {found} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("state left the finite range at t = {t}")]
    NonFinite { t: f64 },

    #[error("characteristic roots are not pairwise distinct (min gap {gap:e})")]
    ConfluentRoots { gap: f64 },

    #[error("linear system is singular or not positive definite (pivot {pivot} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("time {t} outside [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input file {path}: {reason}")]
    InputFile { path: String, reason: String },
}
