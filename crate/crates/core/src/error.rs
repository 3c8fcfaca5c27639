use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Lattice construction was asked for something it cannot build.
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    /// A configuration does not cover what the computation needs.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical procedure could not reach its accuracy contract.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// Malformed text input; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Every ROI came out empty after background subtraction.
    #[error("empty signal: {0}")]
    EmptySignal(String),

    /// The uncertainty of a Cauchy-Schwarz test is zero.
    #[error("degenerate uncertainty: {0}")]
    DegenerateUncertainty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
