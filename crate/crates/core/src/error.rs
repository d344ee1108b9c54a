use thiserror::Error;

/// Errors raised by the numerical kernels and the physics layers above them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The result is not representable in the working precision.
    #[error("range error: {0}")]
    Range(String),

    /// A tolerance could not be met; `estimate` is the best value reached.
    #[error("accuracy error: {message} (achieved error estimate {error_estimate:.3e})")]
    Accuracy {
        message: String,
        estimate: f64,
        error_estimate: f64,
    },

    /// Model parameters and evolution method do not fit together.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Newton refinement of resonance `index` did not converge.
    #[error("pole {index} did not converge: {message}")]
    Convergence { index: usize, message: String },

    /// The argument-principle count disagrees with the located poles.
    #[error("completeness error: winding count {expected} but {found} poles located")]
    Completeness { expected: usize, found: usize },

    /// The request exceeds a hard size guard.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A bracketed search found no sign change.
    #[error("not found: {0}")]
    NotFound(String),

    /// Every retained series order cancelled below the noise floor.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    /// The input contains points that must not be consumed.
    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }

    pub(crate) fn accuracy(msg: impl Into<String>, estimate: f64, error_estimate: f64) -> Self {
        Error::Accuracy {
            message: msg.into(),
            estimate,
            error_estimate,
        }
    }
}
