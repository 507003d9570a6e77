use thiserror::Error;

/// Errors raised by the numerical and statistical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("matrix is not symmetric/Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {value:.3e} below -{tolerance:.3e})")]
    NotPositiveSemidefinite { value: f64, tolerance: f64 },

    #[error("eigenvalue iteration did not converge (reached index {index} after {iterations} iterations)")]
    NonConvergence { index: usize, iterations: usize },

    #[error("aspect ratio must be positive and finite, got {0}")]
    NonPositiveRatio(f64),

    #[error("quadrature too coarse: doubled-resolution estimate differs by {difference:.3e}")]
    QuadratureTooCoarse { difference: f64 },

    #[error("Stieltjes transform requires Im z > 0, got Im z = {0}")]
    LowerHalfPlane(f64),

    #[error("invalid quadrature rule: {0}")]
    InvalidQuadrature(String),

    #[error("invalid weight measure: {0}")]
    InvalidWeights(String),

    #[error("calibration mismatch: {0}")]
    CalibrationMismatch(String),

    #[error("{got} replicates is too few for alpha = {alpha}: need at least {needed}")]
    InsufficientReplicates {
        got: usize,
        needed: usize,
        alpha: f64,
    },

    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("bad model coefficient: {0}")]
    BadCoefficient(String),

    #[error("spatial weights make the SAR system singular (residual {residual:.3e})")]
    SingularWeights { residual: f64 },

    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("column {col} has zero variance")]
    DegenerateSeries { col: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
