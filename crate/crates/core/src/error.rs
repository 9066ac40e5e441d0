use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid distance matrix: {0}")]
    Validation(String),

    #[error("unsupported query: {0}")]
    UnsupportedQuery(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("no qualifying persistence class: {0}")]
    NoQualifyingClass(Box<NoQualifyingClass>),

    #[error(
        "integer lift failed: coboundary of the lifted cochain is {value} on triangle \
         ({}, {}, {}) with q = {prime}; rerun with a different prime \
         (repair by solving the Diophantine system is not implemented)",
        triangle.0, triangle.1, triangle.2
    )]
    LiftFailure {
        triangle: (usize, usize, usize),
        value: i64,
        prime: u32,
    },

    #[error(
        "iterative solver stopped after {iterations} iterations with relative residual \
         {relative_residual:e}; raise --tol or use --solver dense-svd"
    )]
    Convergence {
        iterations: usize,
        relative_residual: f64,
    },

    #[error("query point is not covered by any landmark ball")]
    NotCovered,

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Diagnostic attached to [`Error::NoQualifyingClass`].
#[derive(Debug, Clone, PartialEq)]
pub struct NoQualifyingClass {
    /// Best available candidate `(birth, death)`, if the diagram had any
    /// finite 1-dimensional pair.
    pub candidate: Option<(f64, f64)>,
    pub coverage_radius: f64,
    pub reason: String,
}

impl fmt::Display for NoQualifyingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.candidate {
            Some((birth, death)) => write!(
                f,
                "{} (candidate pair ({birth}, {death}): need max{{a, r_L}} = {} < b/2 = {})",
                self.reason,
                birth.max(self.coverage_radius),
                death / 2.0
            ),
            None => write!(
                f,
                "{} (no finite 1-dimensional pair at r_L = {})",
                self.reason, self.coverage_radius
            ),
        }
    }
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
