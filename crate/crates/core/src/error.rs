use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QdError {
    #[error("invalid differential: {0}")]
    InvalidDifferential(String),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("square-root continuation failed at sample {index}: argument jump {jump:.3} rad")]
    Continuation { index: usize, jump: f64 },
    #[error("direction field vanishes at the seed point")]
    ZeroField,
    #[error("integration path passes through the origin")]
    PathThroughOrigin,
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),
    #[error("evaluation point lies within {distance:e} of a root")]
    PoleProximity { distance: f64 },
    #[error("root iteration did not converge after {iterations} iterations (max residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl QdError {
    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            QdError::Continuation { .. }
                | QdError::ZeroField
                | QdError::InsufficientResolution(_)
                | QdError::Convergence { .. }
        )
    }
}

pub type Result<T, E = QdError> = std::result::Result<T, E>;
