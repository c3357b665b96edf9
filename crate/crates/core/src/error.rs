use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too small: need at least 3 nodes per direction, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize },

    #[error("domain height must be positive, got {0}")]
    NonPositiveLength(f64),

    #[error("{what}: expected length {expected}, got {got}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("invalid boundary condition: {0}")]
    InvalidBc(String),

    #[error("linear solve failed after {iterations} iterations: residual {residual:.3e} > tolerance {tolerance:.3e}")]
    SolveFailed {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("matrix is structurally singular (row {row} is empty)")]
    SingularMatrix { row: usize },

    #[error("subsystem '{subsystem}' failed at step {step}: {source}")]
    StepFailed {
        subsystem: &'static str,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("scenario parse error: {0}")]
    ScenarioParse(String),

    #[error("expression error in '{key}': {message} (at offset {offset})")]
    ExprParse {
        key: String,
        offset: usize,
        message: String,
    },

    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
