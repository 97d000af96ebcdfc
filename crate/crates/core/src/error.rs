use thiserror::Error;

/// Errors produced by estimation, embedding, and learning operations.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration field failed validation.
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    /// Mismatched shapes or lengths between related arguments.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: residual {residual:.3e} exceeds tol {tol:.3e}")]
    Quadrature { residual: f64, tol: f64 },

    /// A linear solve or other numerical routine failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// One element of a batch operation failed.
    #[error("batch item {index}: {source}")]
    Batch { index: usize, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    /// True for errors caused by bad inputs rather than numerical breakdown.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Domain(_) | Error::Config { .. } | Error::Shape(_) => true,
            Error::Quadrature { .. } | Error::Numerical(_) => false,
            Error::Batch { source, .. } => source.is_usage(),
        }
    }
}
