//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, validation and the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Structural problem in a realization or operator (dimension mismatch,
    /// non-Hermitian input, empty alphabet, ...).
    #[error("structural error: {0}")]
    Structural(String),

    /// A symbol or word does not belong to the alphabet at hand.
    #[error("unknown symbol or word: {0}")]
    UnknownSymbol(String),

    /// A precondition of an operation is violated by the supplied data.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Equality constraints of a feasibility problem are mutually
    /// inconsistent.
    #[error("inconsistent constraints: least-squares residual {residual:.3e}")]
    InconsistentConstraints { residual: f64 },

    /// An iterative routine exhausted its budget without reaching a decision.
    #[error("no convergence after {iterations} iterations: {context}")]
    NoConvergence { iterations: usize, context: String },

    /// A word table lacks an entry required by the requested computation.
    #[error("missing table entry for word {0:?}")]
    MissingData(String),

    /// Malformed input file or string.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
