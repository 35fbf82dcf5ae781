use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension overflow: {0}")]
    DimensionOverflow(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("matrix is not positive semidefinite (most negative eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("map is not contractive (norm {norm:.12})")]
    NotContractive { norm: f64 },

    #[error("map is not isometric (residual {residual:.3e})")]
    NotIsometric { residual: f64 },

    #[error("complete positivity fails at t = {t} (most negative Choi eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { t: f64, min_eigenvalue: f64 },

    #[error("semigroup is not contractive at t = {t} (excess {excess:.3e})")]
    NotContractiveSemigroup { t: f64, excess: f64 },

    #[error("intertwining relation fails at t = {t} (residual {residual:.3e})")]
    IntertwiningViolation { t: f64, residual: f64 },

    #[error("family is identically zero: {0}")]
    ZeroFamily(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("time {0} is not available: {1}")]
    TimeUnavailable(String, String),

    #[error("insufficient depth: need level {needed}, have {available}")]
    InsufficientDepth { needed: u32, available: u32 },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("square-root branch is ambiguous")]
    BranchAmbiguity,

    #[error("inner product vanishes; covariance undefined")]
    ZeroInnerProduct,

    #[error("covariance differs across probe times ({0:.3e})")]
    ProbeDisagreement(f64),

    #[error("invalid dyadic time: {0}")]
    InvalidTime(String),
}

pub type Result<T> = std::result::Result<T, Error>;
