use thiserror::Error;

/// Errors surfaced by the symbolic engine and the geometry layers built on it.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("undeclared symbol `{name}` at byte {offset}")]
    Undeclared { name: String, offset: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by zero while normalizing `{0}`")]
    DivisionByZero(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("chart mismatch: {0}")]
    ChartMismatch(String),

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("imaginary tag mismatch: {0}")]
    TagMismatch(String),

    #[error("singular frame: {0}")]
    SingularFrame(String),

    #[error("generator is neither rotation-like nor boost-like: {0}")]
    BadGenerator(String),

    #[error("transition phase is not linear in the periodic coordinate: {0}")]
    NonlinearPhase(String),

    #[error("numeric evaluation failed: {0}")]
    Numeric(String),

    #[error("series expansion unsupported: {0}")]
    Series(String),

    #[error("case construction rejected: {0}")]
    CaseRejected(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
