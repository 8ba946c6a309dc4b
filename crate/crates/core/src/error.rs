use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported wavelet order p = {0} (supported: 1..=10)")]
    UnsupportedOrder(usize),
    #[error("scale error: {0}")]
    Scale(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("level out of range: {0}")]
    LevelOutOfRange(String),
    #[error("measurement budget too small: {0}")]
    BudgetTooSmall(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no feasible point: {0}")]
    Infeasible(String),
    #[error("insufficient points: {0}")]
    InsufficientPoints(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by invalid user input rather than I/O failures.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
