use thiserror::Error;

/// Errors raised by the numerical kernels, samplers and distribution paths.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScnError {
    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or quadrature did not reach the requested tolerance.
    #[error("{what} did not converge after {steps} steps (last estimate {estimate:e}, error {error:e})")]
    NonConvergence {
        what: &'static str,
        steps: usize,
        estimate: f64,
        error: f64,
    },

    /// The closed form cannot be evaluated at these arguments (e.g. a
    /// hypergeometric argument lies on a branch cut).
    #[error("not evaluable: {0}")]
    NotEvaluable(String),

    /// Cholesky factorization failed; the matrix is not positive definite.
    #[error("factorization failed: {0}")]
    Factorization(String),

    /// A log-magnitude left the representable range of `f64`.
    #[error("overflow guard: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, ScnError>;

impl ScnError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ScnError::Domain(msg.into())
    }

    /// True for errors a caller can recover from by switching to Monte Carlo.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            ScnError::NonConvergence { .. } | ScnError::NotEvaluable(_) | ScnError::Overflow(_)
        )
    }
}
