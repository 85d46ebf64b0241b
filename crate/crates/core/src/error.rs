use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dense work limited to n <= {limit}, got n = {n}")]
    GuardExceeded { n: usize, limit: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix exponential overflowed (norm of scaled argument {norm:.3e})")]
    Overflow { norm: f64 },

    #[error("eigenvalue iteration did not converge")]
    NotConverged,

    #[error("starting vector is zero")]
    ZeroStartVector,

    #[error("operator structure must be {expected}")]
    WrongStructure { expected: &'static str },

    #[error("Ritz values are not real (max |Im| = {max_imag:.3e})")]
    SpectrumNotReal { max_imag: f64 },

    #[error("xi_max = {0} must not be positive")]
    PositiveXiMax(f64),

    #[error("estimator unavailable: {0}")]
    EstimatorUnavailable(String),

    #[error("no crossing of zeta(t) = t*tol in [{lo:.3e}, {hi:.3e}]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("operator is not dissipative (mu2 estimate {0:.3e} > 0)")]
    NotDissipative(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config field `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
