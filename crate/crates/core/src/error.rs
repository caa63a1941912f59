use thiserror::Error;

use crate::lp::LpStatus;
use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("malformed linear program: {0}")]
    InvalidLp(String),
    #[error("numerical instability: {0}")]
    Numerical(String),
    #[error("operation requires an optimal solution, status is {0:?}")]
    NotOptimal(LpStatus),
    #[error("instance failed validation:\n{0}")]
    Validation(ValidationReport),
    #[error("oracle size guard: {slots} candidate slots exceeds the limit of {limit}")]
    OracleTooLarge { slots: usize, limit: usize },
    #[error("scaled trapezoid needs non-empty traces (trace {0} is empty)")]
    EmptyTrace(usize),
    #[error("line {line} [{section}]: {message}")]
    Parse {
        line: usize,
        section: String,
        message: String,
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
