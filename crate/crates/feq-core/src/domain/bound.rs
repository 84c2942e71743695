//! Majorant bounds: nonnegative combinations of slot-norm powers.

use super::element::PairPoint;
use crate::error::DomainError;

/// One bound term `coef * |u|^exp_first * |v|^exp_second` (norms of the two
/// slots raised to nonnegative powers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerm {
    pub coef: f64,
    pub exp_first: f64,
    pub exp_second: f64,
}

/// A pointwise bound `mu(u, v) = sum_j coef_j * |u|^e1_j * |v|^e2_j` with
/// nonnegative coefficients and exponents. Values are finite and nonnegative
/// at every finite point, and each term is homogeneous: scaling slot `u` by
/// `t >= 0` multiplies the term by `t^e1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSpec {
    terms: Vec<BoundTerm>,
}

impl BoundSpec {
    /// Validate and build. Coefficients must be finite and `>= 0`; exponents
    /// finite and `>= 0`. Zero-coefficient terms are allowed and contribute
    /// nothing.
    pub fn new(terms: Vec<BoundTerm>) -> Result<Self, DomainError> {
        for term in &terms {
            if !term.coef.is_finite() || term.coef < 0.0 {
                return Err(DomainError::InvalidBoundCoefficient(term.coef));
            }
            if !term.exp_first.is_finite() || term.exp_first < 0.0 {
                return Err(DomainError::InvalidBoundExponent(term.exp_first));
            }
            if !term.exp_second.is_finite() || term.exp_second < 0.0 {
                return Err(DomainError::InvalidBoundExponent(term.exp_second));
            }
        }
        Ok(Self { terms })
    }

    /// Build from `(coef, exp_first, exp_second)` triples.
    pub fn from_triples(triples: Vec<(f64, f64, f64)>) -> Result<Self, DomainError> {
        Self::new(
            triples
                .into_iter()
                .map(|(coef, exp_first, exp_second)| BoundTerm {
                    coef,
                    exp_first,
                    exp_second,
                })
                .collect(),
        )
    }

    /// The identically-zero bound.
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[BoundTerm] {
        &self.terms
    }

    /// True when every coefficient is zero (or there are no terms).
    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef == 0.0)
    }

    /// Evaluate at a point.
    pub fn value(&self, point: &PairPoint) -> f64 {
        self.value_at_norms(point.first().norm(), point.second().norm())
    }

    /// Evaluate from the two slot norms directly. `0^0` is taken as `1`, so
    /// constant terms (both exponents zero) behave as constants everywhere.
    pub fn value_at_norms(&self, norm_first: f64, norm_second: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * pow0(norm_first, t.exp_first) * pow0(norm_second, t.exp_second))
            .sum()
    }

    /// A copy with every coefficient multiplied by a nonnegative factor.
    pub fn scaled(&self, factor: f64) -> Result<Self, DomainError> {
        Self::new(
            self.terms
                .iter()
                .map(|t| BoundTerm {
                    coef: t.coef * factor,
                    ..*t
                })
                .collect(),
        )
    }
}

/// `x^e` with the convention `0^0 = 1` (norms are nonnegative, so no other
/// special cases arise).
#[inline]
pub(crate) fn pow0(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}
