//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// An enumeration or audit exceeded its configured resource cap.
    #[error("resource limit exceeded during {what} (cap {limit})")]
    ResourceLimit { what: String, limit: usize },

    /// A sign sequence admits no tent decomposition from this position.
    #[error("tent decomposition failed at position {position}: {reason}")]
    TentDecomposition { position: usize, reason: String },

    /// Invalid user-supplied input (dimension, parameter range, shape).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two fields or grids with incompatible shapes were combined.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An adaptive quadrature failed to reach its tolerance.
    #[error("quadrature did not converge: {what} (achieved {achieved:e}, wanted {wanted:e})")]
    QuadratureNonConvergence {
        what: String,
        achieved: f64,
        wanted: f64,
    },

    /// An iterative solver failed to reach its tolerance within its budget.
    #[error("iteration did not converge: {what} (residual {residual:e} after {iters} iterations)")]
    IterationNonConvergence {
        what: String,
        residual: f64,
        iters: usize,
    },

    /// A geometric input was degenerate (e.g. affinely dependent vertices).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A runtime invariant of an integrator or solver was violated.
    #[error("invariant violated: {0}")]
    Invariant(String),
}
