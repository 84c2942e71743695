//! Errors produced by the iteration engine.

use crate::domain::PairPoint;
use crate::error::DomainError;

use super::limit::IterationTrace;

/// Failure modes of operator iteration and limit extraction.
#[derive(Debug, Clone, thiserror::Error)]
pub enum EngineError {
    /// The majorant iteration does not contract: either the closed-form
    /// factor is `>= 1`, or the measured step ratios kept growing. The
    /// majorant series diverges and no stability constant exists.
    #[error("iteration is not contracting: growth factor {factor}")]
    NotContractive {
        factor: f64,
        /// Iteration history up to the point divergence was detected, when
        /// the failure arose mid-iteration (absent for closed-form rejects).
        trace: Option<Box<IterationTrace>>,
    },

    /// The tail bound did not fall below tolerance within the iteration
    /// budget.
    #[error(
        "iteration limit of {max_iter} reached with tail bound {last_tail:.3e} still above tolerance"
    )]
    MaxIterations {
        max_iter: usize,
        last_tail: f64,
        trace: Option<Box<IterationTrace>>,
    },

    /// Operator-power expansion for non-diagonal (non-commuting) maps grows
    /// exponentially; this run exceeded the configured depth cap or the
    /// expansion size guard.
    #[error(
        "operator power expansion at level {requested} exceeds the capacity cap {cap}; \
         raise the depth cap, lower the iteration count, or relax the tolerance"
    )]
    DepthCapExceeded { requested: u32, cap: u32 },

    /// A function evaluation produced a non-finite value.
    #[error("non-finite value during evaluation at {point:?}: {detail}")]
    NonFinite { point: PairPoint, detail: String },

    /// A uniqueness probe was asked to compare models with different
    /// bilinear cores; the comparison is only meaningful over a shared core.
    #[error("uniqueness probe requires both models to share the same bilinear core")]
    CoreMismatch,

    /// Invalid inputs (dimension mismatches, bad parameters, ...).
    #[error(transparent)]
    Domain(#[from] DomainError),
}
