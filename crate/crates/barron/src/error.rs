use std::fmt;

/// Errors raised across the crate. The CLI maps variants onto exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("frequency overflow: {0} does not fit the 31-bit frequency range")]
    FrequencyOverflow(i64),

    #[error("expansion mixes basis families ({0} and {1})")]
    MixedFamily(String, String),

    #[error("term {key} has the wrong parity for {bc} boundary conditions (coefficient {coef:e})")]
    ParityMismatch { key: String, bc: String, coef: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("assumption audit failed: {0}")]
    Audit(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("flow diverged at step {step} (residual norm {residual:e}); declared constants are probably wrong")]
    Diverged { step: usize, residual: f64 },

    #[error("profile has no stationary point strictly inside the interval")]
    NoStationaryPoint,

    #[error("system matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl fmt::Display) -> Self {
        Error::Parse {
            line,
            msg: msg.to_string(),
        }
    }
}
