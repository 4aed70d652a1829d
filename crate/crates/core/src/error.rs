use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("operation requires a plain program, but rule {rule} contains an epistemic literal")]
    NotPlain { rule: usize },

    #[error("brute-force cap exceeded: {what} has {size} atoms, cap is {cap}")]
    BruteForceCapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("the program has no world views")]
    NoWorldViews,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("clause {index} has {len} literals, at most 3 are allowed")]
    ClauseTooLong { index: usize, len: usize },

    #[error(transparent)]
    Backend(#[from] crate::backends::BackendError),
}

pub type Result<T> = std::result::Result<T, Error>;
