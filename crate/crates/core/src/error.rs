use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A dual-isometric (or related) check failed on an input that the operation requires to pass.
    #[error("{what} failed with residual {residual:.3e}")]
    ConditionFailed { what: String, residual: f64 },

    #[error("{what}: size {size} exceeds guard {limit}")]
    Guard { what: String, size: u128, limit: u128 },

    /// Post-selection onto a pattern that the state does not contain.
    #[error("post-selection probability {probability:.3e} is zero")]
    ZeroProbability { probability: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the CLI: 1 for input problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConditionFailed { .. } | Error::Numerical(_) | Error::ZeroProbability { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
