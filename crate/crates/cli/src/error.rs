use std::fmt;

use tomolab_core::Error as CoreError;

/// Process exit classes. `Other` covers I/O and serialization trouble that
/// fits none of the documented classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitKind {
    Other = 1,
    Usage = 2,
    Construction = 3,
    Numerical = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub error: anyhow::Error,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn new(kind: ExitKind, error: impl Into<anyhow::Error>) -> Self {
        CliError { kind, error: error.into() }
    }

    pub fn usage(msg: impl fmt::Display) -> Self {
        Self::new(ExitKind::Usage, anyhow::anyhow!("{msg}"))
    }

    pub fn construction(msg: impl fmt::Display) -> Self {
        Self::new(ExitKind::Construction, anyhow::anyhow!("{msg}"))
    }

    pub fn numerical(msg: impl fmt::Display) -> Self {
        Self::new(ExitKind::Numerical, anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> i32 {
        self.kind as i32
    }

    /// Prefixes the message, keeping the exit class.
    pub fn context(self, msg: impl fmt::Display + Send + Sync + 'static) -> Self {
        CliError { kind: self.kind, error: self.error.context(msg) }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

fn classify(e: &CoreError) -> ExitKind {
    match e {
        CoreError::InvalidDimension(_)
        | CoreError::DimensionMismatch { .. }
        | CoreError::InvalidParameter(_)
        | CoreError::InconsistentSubsystems { .. }
        | CoreError::InvalidSubsystemSelection(_)
        | CoreError::NotDensity(_)
        | CoreError::InvalidProbabilities(_) => ExitKind::Usage,
        CoreError::NotFiducial { .. }
        | CoreError::FiducialSearchFailed { .. }
        | CoreError::FiducialFormat(_)
        | CoreError::ZeroTraceEffect(_)
        | CoreError::NotInformationallyComplete(_)
        | CoreError::EmptyMeasurement => ExitKind::Construction,
        CoreError::NotHermitian(_) | CoreError::ZeroNorm => ExitKind::Numerical,
        CoreError::Io(_) | CoreError::Json(_) => ExitKind::Other,
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::new(classify(&e), e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(ExitKind::Other, e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new(ExitKind::Other, e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new(ExitKind::Other, e)
    }
}

/// Rejects NaN and infinities in computed outputs.
pub fn ensure_finite(label: &str, value: f64) -> CliResult<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::numerical(format!("{label} evaluated to {value}")))
    }
}
