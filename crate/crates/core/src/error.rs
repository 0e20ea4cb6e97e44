//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ZsError {
    /// Grid geometry violation (non-commensurate endpoints, sample count mismatch, ...).
    #[error("grid error: {0}")]
    Grid(String),
    /// File ingestion failure.
    #[error("io error: {0}")]
    Io(String),
    /// Unknown method name or invalid catalog request.
    #[error("catalog error: {0}")]
    Catalog(String),
    /// A one-step denominator vanished; the step size is too large.
    #[error("step size error: {0} (choose a smaller step h)")]
    StepSize(String),
    /// Polynomial evaluation at an invalid point.
    #[error("evaluation error: {0}")]
    Eval(String),
    /// Transform/evaluation size too small for the data.
    #[error("size error: {0}")]
    Size(String),
    /// Operation not available for this scheme/boundary combination.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Convergence-order fit could not be performed.
    #[error("fit error: {0}")]
    Fit(String),
    /// Derivative of the scattering coefficient vanished at a reported root.
    #[error("multiple root: {0}")]
    MultipleRoot(String),
}

impl From<std::io::Error> for ZsError {
    fn from(e: std::io::Error) -> Self {
        ZsError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ZsError>;
