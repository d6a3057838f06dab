use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum MfaError {
    /// A point or parameter lies outside the domain where the quantity is defined,
    /// including evaluations at `q*u + t <= theta`.
    #[error("domain error: {0}")]
    Domain(String),

    /// A word violates the incidence matrix.
    #[error("inadmissible word: {0}")]
    Admissibility(String),

    /// Invalid construction parameters (overlapping images, escaping images, bad intervals, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A declared resource budget (word count, matrix size) would be exceeded.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// An iterative method failed to reach its tolerance within its budget.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// The requested computation is not supported for this system structure.
    #[error("unsupported structure: {0}")]
    Unsupported(String),

    /// A quantity cannot be determined from the available metadata.
    #[error("unknown: {0}")]
    Unknown(String),

    /// Configuration file or flag errors.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MfaError>;
