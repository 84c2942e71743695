//! Validation errors for domain types.

use thiserror::Error;

/// Errors produced while constructing or combining domain values.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum DomainError {
    /// A coordinate was NaN or infinite.
    #[error("non-finite coordinate {value} at index {index}")]
    NonFiniteCoordinate { index: usize, value: f64 },

    /// Two values that must share a dimension did not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An operator needs at least one term.
    #[error("operator must have at least one term")]
    EmptyOperator,

    /// Operator coefficients must be finite and nonzero.
    #[error("invalid operator coefficient {0} (must be finite and nonzero)")]
    InvalidCoefficient(f64),

    /// A map entry could not be converted to an exact rational.
    #[error("non-finite map entry {0}")]
    NonFiniteMapEntry(f64),

    /// Bound coefficients must be finite and nonnegative.
    #[error("invalid bound coefficient {0} (must be finite and >= 0)")]
    InvalidBoundCoefficient(f64),

    /// Bound exponents must be finite and nonnegative.
    #[error("invalid bound exponent {0} (must be finite and >= 0)")]
    InvalidBoundExponent(f64),

    /// Perturbation amplitude must lie in [0, 1].
    #[error("perturbation amplitude {0} outside [0, 1]")]
    InvalidAmplitude(f64),

    /// A core matrix was empty or not square.
    #[error("core matrix must be square and nonempty: {0} entries for dimension {1}")]
    BadCoreMatrix(usize, usize),

    /// A function model needs at least one output component.
    #[error("function model must have at least one output component")]
    EmptyModel,

    /// A scalar parameter failed its constraint.
    #[error("invalid parameter {name} = {value}: {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
}
