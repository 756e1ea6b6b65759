use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("weight alpha={alpha} is incompatible with sample counts n={n}, m={m}")]
    BadWeight { alpha: f64, n: usize, m: usize },

    #[error("linear system is singular (lambda = 0 with a rank-deficient Gram matrix)")]
    SingularSystem,

    #[error("hessian is not positive definite")]
    SingularHessian,

    #[error("responses must be in {{-1, +1}} (row {row} has {value})")]
    BadLabels { row: usize, value: f64 },

    #[error("did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        /// Last iterate, when the solver has one worth reporting.
        last: Vec<f64>,
    },

    #[error("eigenvalue omega_{index} is zero, lambda* = 1/omega is undefined")]
    ZeroEigenvalue { index: usize },

    #[error("penalty order p={penalty_order} too weak for dimension d={dim} (need p > d/4)")]
    PenaltyTooWeak { penalty_order: f64, dim: usize },

    #[error("delta + delta_s = {sum} <= 1 is outside the supported regime")]
    InvalidRegime { sum: f64 },

    #[error("need at least 4 distinct sample sizes to fit a power law, got {distinct}")]
    TooFewPoints { distinct: usize },

    #[error("theta must have unit norm, got {norm}")]
    NotUnitNorm { norm: f64 },

    #[error("task {task} does not match ground truth {truth}")]
    TaskMismatch {
        task: &'static str,
        truth: &'static str,
    },

    #[error("{0}")]
    Format(String),

    #[error("cell n={n} m={m} alpha={alpha}, replicate {replicate}: {source}")]
    CellFailed {
        n: usize,
        m: usize,
        alpha: f64,
        replicate: usize,
        source: Box<Error>,
    },
}

impl Error {
    /// True for numerical failures (as opposed to bad inputs).
    pub fn is_numeric(&self) -> bool {
        if let Error::CellFailed { source, .. } = self {
            return source.is_numeric();
        }
        matches!(
            self,
            Error::SingularSystem
                | Error::SingularHessian
                | Error::NotConverged { .. }
                | Error::ZeroEigenvalue { .. }
        )
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
