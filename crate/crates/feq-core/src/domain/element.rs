//! Points of the paired vector domain.

use crate::error::DomainError;

/// Canonicalize a coordinate: map `-0.0` to `+0.0` so that equal points have
/// equal bit patterns (hash keys and reproducible oscillator input depend on
/// this).
#[inline]
pub(crate) fn canonical(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// An element of the slot space: a finite coordinate vector with the
/// Euclidean norm.
///
/// Invariants enforced at construction: every coordinate is finite, and
/// `-0.0` is canonicalized to `+0.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorElement {
    coords: Vec<f64>,
}

impl VectorElement {
    /// Build an element, rejecting NaN and infinite coordinates.
    pub fn new(coords: Vec<f64>) -> Result<Self, DomainError> {
        for (index, &value) in coords.iter().enumerate() {
            if !value.is_finite() {
                return Err(DomainError::NonFiniteCoordinate { index, value });
            }
        }
        let coords = coords.into_iter().map(canonical).collect();
        Ok(Self { coords })
    }

    /// Convenience constructor for a one-dimensional element.
    pub fn scalar(x: f64) -> Result<Self, DomainError> {
        Self::new(vec![x])
    }

    /// The zero element of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Euclidean length. Zero exactly when all coordinates are zero.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    /// Coordinate-wise sum; the dimensions must agree.
    pub fn add(&self, other: &Self) -> Result<Self, DomainError> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Coordinate-wise difference; the dimensions must agree.
    pub fn sub(&self, other: &Self) -> Result<Self, DomainError> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Scale every coordinate by a finite factor.
    pub fn scale(&self, factor: f64) -> Result<Self, DomainError> {
        Self::new(self.coords.iter().map(|c| c * factor).collect())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, DomainError> {
        if self.dim() != other.dim() {
            return Err(DomainError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }
}

/// A point of the paired domain: two slot elements of equal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPoint {
    first: VectorElement,
    second: VectorElement,
}

impl PairPoint {
    pub fn new(first: VectorElement, second: VectorElement) -> Result<Self, DomainError> {
        if first.dim() != second.dim() {
            return Err(DomainError::DimensionMismatch {
                expected: first.dim(),
                found: second.dim(),
            });
        }
        Ok(Self { first, second })
    }

    /// Convenience constructor for the one-dimensional pair `((u), (v))`.
    pub fn of_scalars(u: f64, v: f64) -> Result<Self, DomainError> {
        Self::new(VectorElement::scalar(u)?, VectorElement::scalar(v)?)
    }

    /// The origin of the paired domain.
    pub fn origin(dim: usize) -> Self {
        Self {
            first: VectorElement::zeros(dim),
            second: VectorElement::zeros(dim),
        }
    }

    pub fn first(&self) -> &VectorElement {
        &self.first
    }

    pub fn second(&self) -> &VectorElement {
        &self.second
    }

    /// Slot dimension shared by both components.
    pub fn dim(&self) -> usize {
        self.first.dim()
    }

    /// Stable bit-pattern key: the IEEE bits of every coordinate, first slot
    /// then second. Two points compare equal exactly when their keys match
    /// (coordinates are canonicalized at construction).
    pub fn bit_key(&self) -> Vec<u64> {
        self.first
            .coords()
            .iter()
            .chain(self.second.coords())
            .map(|c| c.to_bits())
            .collect()
    }
}

/// Euclidean norm of a raw value vector.
pub(crate) fn l2(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Euclidean distance between two value vectors of equal length.
pub(crate) fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
