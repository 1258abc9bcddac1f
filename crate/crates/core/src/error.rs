use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("agent index {index} out of range for {n} agents")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid problem: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("{context} did not converge after {iterations} iterations (max residual {residual:e})")]
    Convergence {
        context: String,
        iterations: usize,
        residual: f64,
        partial: Vec<f64>,
    },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("instance {index} failed: {source}")]
    Instance {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Convergence { .. } | Error::Calibration(_) => true,
            Error::Instance { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
