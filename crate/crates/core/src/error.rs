use thiserror::Error;

/// Errors produced by the generalized-inverse routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operand shapes are not conformable for the requested operation.
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    /// The input lies outside the domain of the operation
    /// (zero weight, group inverse of an index > 1 matrix, singular block, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A floating-point kernel failed (non-convergence, non-finite input or output).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A computed decomposition violated one of its defining invariants.
    #[error("decomposition validation failed: {check} residual {residual:.3e} exceeds {threshold:.3e}")]
    Decomposition {
        check: &'static str,
        residual: f64,
        threshold: f64,
    },

    /// The exact rational path refused an input larger than its size guard.
    #[error("exact path limited to {limit}x{limit} matrices, got {rows}x{cols}")]
    ExactSizeGuard { rows: usize, cols: usize, limit: usize },
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
