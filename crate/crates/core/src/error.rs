use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid problem data: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid set or cone descriptor: {0}")]
    Descriptor(String),

    #[error("Slater condition violated: {0}")]
    SlaterViolation(String),

    #[error("subproblem is unbounded below: {0}")]
    Unbounded(String),

    #[error("backtracking failed after {halvings} stepsize reductions at iteration {iteration}; state: {state}")]
    Backtracking {
        iteration: usize,
        halvings: usize,
        state: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("failed to parse {what}: {source}")]
    Json {
        what: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension {
            context,
            expected,
            got,
        });
    }
    Ok(())
}
