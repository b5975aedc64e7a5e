use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: need d >= 2")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |A - A^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("subsystem dimensions {dims:?} do not multiply to {dim}")]
    InconsistentSubsystems { dims: Vec<usize>, dim: usize },

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystemSelection(String),

    #[error("vector has zero norm")]
    ZeroNorm,

    #[error(
        "not a Heisenberg-Weyl fiducial: worst displacement ({k1},{k2}) deviates by {deviation:e} \
         (tolerance {tolerance:e})"
    )]
    NotFiducial { k1: usize, k2: usize, deviation: f64, tolerance: f64 },

    #[error("fiducial search in d={dim} failed after {restarts} restarts (best residual {best_residual:e})")]
    FiducialSearchFailed { dim: usize, restarts: usize, best_residual: f64 },

    #[error("effect {0} has non-positive trace")]
    ZeroTraceEffect(usize),

    #[error("measurement is not informationally complete (condition number {0:e})")]
    NotInformationallyComplete(f64),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("measurement has no effects")]
    EmptyMeasurement,

    #[error("malformed fiducial file: {0}")]
    FiducialFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
