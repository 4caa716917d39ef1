use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {arg} = {value} outside the domain {domain}")]
    Domain {
        arg: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("point is not in the interior of the barrier cone")]
    OutsideCone,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("infeasible starting point: {0}")]
    Infeasible(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical fault: {0}")]
    Numerical(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed input {path}: {reason}")]
    Parse { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
