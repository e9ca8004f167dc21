use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("trace {0} violates the normalization tag")]
    BadTrace(f64),
    #[error("Kraus operators are not trace preserving (deviation {0:e})")]
    IncompleteKraus(f64),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("covariance invariant violated: {0}")]
    CovarianceViolation(String),
    #[error("reference state is not separable: {0}")]
    NotSeparable(String),
    #[error("support violation: {0}")]
    Support(String),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("eps = {eps} outside the feasible interval ({lo}, {hi}]")]
    Infeasible { eps: f64, lo: f64, hi: f64 },
    #[error("{0}")]
    Parse(String),
}

impl Error {
    /// True for failures of a numerical procedure rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotConverged { .. })
    }
}
