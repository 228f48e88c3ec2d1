use thiserror::Error;

/// Errors raised across the crate.
///
/// The CLI maps these onto exit codes, see [`BolzaError::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BolzaError {
    /// Malformed or inconsistent input data (shapes, ordering, encodings).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Two objects that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A time outside `[0, T]`.
    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    /// A point outside the effective domain of a convex function.
    #[error("point {point} outside domain [{lo}, {hi}]")]
    OutOfDomain { point: f64, lo: f64, hi: f64 },

    /// The transcribed problem has no feasible point.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An iterative method exhausted its budget.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// A declared Lipschitz/growth bound was violated on a sample.
    #[error("declared bound violated: {0}")]
    BoundViolated(String),

    /// A candidate failed certification.
    #[error("certification failed: {0}")]
    CertificationFailed(String),

    #[error("io: {0}")]
    Io(String),
}

impl BolzaError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        BolzaError::Invalid(msg.into())
    }

    /// Process exit code used by the `bolza` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            BolzaError::Infeasible(_) => 3,
            BolzaError::CertificationFailed(_) => 4,
            BolzaError::NonConvergence(_) | BolzaError::BoundViolated(_) => 5,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for BolzaError {
    fn from(e: std::io::Error) -> Self {
        BolzaError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, BolzaError>;
