use thiserror::Error;

pub type Result<T, E = TdError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TdError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("feature {index} has value {value}; replacing traces are only defined for binary (0/1) features")]
    NonBinaryFeature { index: usize, value: f64 },

    #[error("action {action} out of range for {num_actions} actions")]
    ActionOutOfRange { action: usize, num_actions: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("state {0} is terminal; the episode must stop before stepping from it")]
    TerminalState(usize),

    #[error("linear system is singular: {0}")]
    SingularSystem(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("episode exceeded the step cap of {0} without terminating")]
    StepCapExceeded(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("trajectory lacks required annotation: {0}")]
    MissingAnnotation(&'static str),

    #[error("horizon {requested} is beyond the recorded data ({available} steps)")]
    HorizonBeyondData { requested: usize, available: usize },

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("malformed environment file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(TdError::DimensionMismatch { expected, actual })
    }
}
