use thiserror::Error;

/// Errors raised by the numerical kernels and the functional builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("eigenvalue iteration did not converge (stalled at index {index} of {dim})")]
    Convergence { index: usize, dim: usize },

    #[error(
        "Lyapunov operator is singular: eigenvalues {lambda_i} and {lambda_j} sum to {gap:.3e}"
    )]
    SingularOperator {
        lambda_i: String,
        lambda_j: String,
        gap: f64,
    },

    #[error("numerical failure: residual {residual:.3e} exceeds bound {bound:.3e}")]
    NumericalFailure { residual: f64, bound: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("Lyapunov condition violated: boundary system condition number {cond:.3e}")]
    LyapunovCondition { cond: f64 },

    #[error("{scheme} model: {source}")]
    InScheme {
        scheme: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    /// The innermost error, stripping scheme context.
    pub fn root(&self) -> &Error {
        match self {
            Error::InScheme { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
