//! Operator specifications: weighted sums of function values at mapped points.

use super::map::ArgMap;
use crate::error::DomainError;

/// One term of an operator: a signed coefficient attached to an argument map.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm {
    pub coef: f64,
    pub map: ArgMap,
}

/// An operator `(Tf)(q) = sum_i coef_i * f(map_i(q))` given by a nonempty
/// list of terms. The same data also defines the majorant operator, which
/// uses the absolute coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    terms: Vec<OperatorTerm>,
}

impl OperatorSpec {
    /// Validate and build: at least one term, every coefficient finite and
    /// nonzero.
    pub fn new(terms: Vec<OperatorTerm>) -> Result<Self, DomainError> {
        if terms.is_empty() {
            return Err(DomainError::EmptyOperator);
        }
        for term in &terms {
            if !term.coef.is_finite() || term.coef == 0.0 {
                return Err(DomainError::InvalidCoefficient(term.coef));
            }
        }
        Ok(Self { terms })
    }

    /// Build from `(coefficient, map)` pairs.
    pub fn from_pairs(pairs: Vec<(f64, ArgMap)>) -> Result<Self, DomainError> {
        Self::new(
            pairs
                .into_iter()
                .map(|(coef, map)| OperatorTerm { coef, map })
                .collect(),
        )
    }

    pub fn terms(&self) -> &[OperatorTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `s = sum_i |coef_i|`, always positive for a valid spec.
    pub fn abs_coef_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coef.abs()).sum()
    }

    /// True when every argument map is diagonal; diagonal maps commute, which
    /// enables the multinomial collapse of operator powers.
    pub fn all_diagonal(&self) -> bool {
        self.terms.iter().all(|t| t.map.is_diagonal())
    }
}
