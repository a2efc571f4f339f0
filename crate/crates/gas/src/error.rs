//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    /// A parameter or observation lies outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The model specification is inconsistent.
    #[error("specification error: {0}")]
    Spec(String),

    /// The constraint system is inconsistent.
    #[error("constraint error: {0}")]
    Constraint(String),

    /// A joint recursion with a (near) unit root has no closed long-term
    /// value; the caller must supply `par_init`.
    #[error(
        "unit-root initialization: |1 - sum(phi)| <= 1e-8 for parameter `{0}`; \
         supply par_init to initialize the recursion"
    )]
    UnitRootInit(String),

    /// No starting grid point produced a finite likelihood.
    #[error("estimation start error: no grid point yields a finite likelihood")]
    EstimationStart,

    /// The optimizer was handed a non-finite objective at its start point.
    #[error("optimizer start error: objective is not finite at the starting point")]
    NonFiniteStart,

    /// A resampling/redraw loop exceeded its attempt cap.
    #[error("rejection cap exceeded: {0}")]
    RejectionCap(String),

    /// The recursion left the parameter support or the likelihood
    /// degenerated at the given step.
    #[error("non-finite filter: the recursion failed at step {0}")]
    NonFiniteFilter(usize),

    /// Input data is unusable.
    #[error("data error: {0}")]
    Data(String),

    /// Dimension mismatch between inputs.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// CLI/config usage error (exit code 1).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }
}
