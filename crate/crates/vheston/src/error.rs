use thiserror::Error;

/// Errors shared by all numerical modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A special-function evaluation scheme failed to converge or overflowed.
    #[error("Mittag-Leffler evaluation failed (alpha={alpha}, beta={beta}, z={z}): {reason}")]
    NumericFailure {
        alpha: f64,
        beta: f64,
        z: f64,
        reason: String,
    },

    /// Quadrature could not reach the requested tolerance within its node budget.
    #[error(
        "quadrature tolerance {tol:e} not reached: achieved error estimate {achieved:e} \
         after {evaluations} integrand evaluations"
    )]
    AccuracyFailure {
        tol: f64,
        achieved: f64,
        evaluations: usize,
    },

    /// The Riccati predictor/corrector produced a non-finite value.
    #[error("Riccati solver diverged at node {node} (t={t}): non-finite iterate")]
    Divergence { node: usize, t: f64 },

    /// A solution invariant was violated beyond numerical tolerance.
    #[error("invariant violated at node {node}: Re(phi2)={re:e} exceeds tolerance {tol:e}")]
    InvariantViolation { node: usize, re: f64, tol: f64 },

    /// Invalid argument or parameter outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Divergence and sign-invariant violations are grid artifacts that a finer
    /// time grid can repair; everything else is a hard failure.
    pub fn is_grid_retryable(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. } | Error::InvariantViolation { .. }
        )
    }
}
