use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters outside the region where the formulas converge.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("variable index {var} out of range for dimension {dim}")]
    Index { var: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("usage: {0}")]
    Usage(String),

    /// An internal invariant failed; this points at a construction bug
    /// rather than at bad input.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("Fock cutoff {cutoff} is too small (tail mass {tail:.3e}); increase the cutoff")]
    CutoffInadequate { cutoff: usize, tail: f64 },

    #[error("heralding failed: success probability {probability:.3e}")]
    HeraldFailure { probability: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }
}
