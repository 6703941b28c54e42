use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("problem validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("robust counterpart is infeasible: {0}")]
    Infeasible(String),

    #[error("program is unbounded: {0}")]
    Unbounded(String),

    #[error("pole-set does not cover the uncertainty set: {0}")]
    NotCovering(String),

    #[error("enumeration cap exceeded: {what} needs dimension {dim}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        dim: usize,
        cap: usize,
    },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("iteration limit reached: {0}")]
    IterationLimit(String),

    #[error("bound sequence violated: {0}")]
    BoundViolation(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_check(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension(format!(
            "{what}: expected {expected}, got {got}"
        )));
    }
    Ok(())
}
