use thiserror::Error;

/// Validation failures for the shared domain types.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("alternative {id} is out of range for {m} alternatives")]
    OutOfRange { id: usize, m: usize },
    #[error("alternative {0} appears more than once")]
    Duplicate(usize),
    #[error("expected {expected} alternatives, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("alternatives {0} and {1} share the same cardinal position")]
    DuplicatePosition(usize, usize),
    #[error("{what} exceeds the cap: {value} > {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },
    #[error("invalid number {0:?}")]
    InvalidNumber(String),
    #[error("parse error: {0}")]
    Parse(String),
}
