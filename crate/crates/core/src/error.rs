use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("states live on different grids")]
    GridMismatch,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A stage time reached the first singularity of a kick-drift-kick factorization.
    #[error(
        "stage time {t} exceeds factorization horizon {t_star}{}",
        stage.map(|s| format!(" at stage {s}")).unwrap_or_default()
    )]
    Horizon {
        stage: Option<usize>,
        t: f64,
        t_star: f64,
        /// Largest step size that keeps every stage inside the horizon, when known.
        max_step: Option<f64>,
    },

    #[error("factorization is singular at t = {t} (g = {g:e})")]
    Singular { t: f64, g: f64 },

    #[error("unknown splitting scheme '{0}'")]
    UnknownScheme(String),

    #[error("the Hermite-basis split requires a constant trap frequency")]
    TimeDependentHermite,

    #[error("drift cache built for theta = {cached}, requested {requested}")]
    DriftCacheMismatch { cached: f64, requested: f64 },

    #[error("reference solution not converged: halving the step changed it by {difference:e} (tolerance {tolerance:e})")]
    ReferenceNotConverged { difference: f64, tolerance: f64 },

    #[error("basis size ceiling {ceiling} reached with residual {residual:e}")]
    BasisCeiling { ceiling: usize, residual: f64 },
}
