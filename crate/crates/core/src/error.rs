use thiserror::Error;

/// Errors raised by geometry primitives, optimizers and privacy mechanisms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid point on {manifold}: residual {residual:.3e} exceeds {tol:.1e}")]
    InvalidPoint {
        manifold: String,
        residual: f64,
        tol: f64,
    },

    #[error("invalid tangent on {manifold}: residual {residual:.3e} exceeds {tol:.1e}")]
    InvalidTangent {
        manifold: String,
        residual: f64,
        tol: f64,
    },

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("numeric failure in {op}")]
    NumericFailure { op: &'static str },

    #[error("noise calibration failed: target unreachable on [{lo:.3e}, {hi:.3e}]")]
    Calibration { lo: f64, hi: f64 },
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
