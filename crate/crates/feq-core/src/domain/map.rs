//! Exact rational block maps on the paired domain.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use super::element::{canonical, PairPoint, VectorElement};
use crate::error::DomainError;

/// A 2x2 rational block map acting on a pair of slot vectors:
/// `(u, v) -> (a*u + b*v, c*u + d*v)`.
///
/// Entries are exact rationals, so compositions of maps are exact: composing
/// any number of maps and then applying the product gives the same rational
/// coordinates as applying them one at a time. Application to a floating
/// point performs the linear combination in exact rational arithmetic and
/// rounds once per coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArgMap {
    a: BigRational,
    b: BigRational,
    c: BigRational,
    d: BigRational,
}

impl ArgMap {
    pub fn new(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Self {
        Self { a, b, c, d }
    }

    /// A diagonal map `(u, v) -> (a*u, d*v)`.
    pub fn diagonal(a: BigRational, d: BigRational) -> Self {
        Self::new(a, BigRational::zero(), BigRational::zero(), d)
    }

    /// Build a map from floating entries. Every finite `f64` is an exact
    /// rational, so no precision is lost; non-finite entries are rejected.
    pub fn from_f64(a: f64, b: f64, c: f64, d: f64) -> Result<Self, DomainError> {
        let conv = |x: f64| {
            BigRational::from_float(x).ok_or(DomainError::NonFiniteMapEntry(x))
        };
        Ok(Self::new(conv(a)?, conv(b)?, conv(c)?, conv(d)?))
    }

    /// Diagonal map with entries given as exact integer fractions.
    pub fn diagonal_ratio(a_num: i64, a_den: i64, d_num: i64, d_den: i64) -> Self {
        Self::diagonal(
            BigRational::new(BigInt::from(a_num), BigInt::from(a_den)),
            BigRational::new(BigInt::from(d_num), BigInt::from(d_den)),
        )
    }

    pub fn identity() -> Self {
        Self::new(
            BigRational::one(),
            BigRational::zero(),
            BigRational::zero(),
            BigRational::one(),
        )
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn c(&self) -> &BigRational {
        &self.c
    }

    pub fn d(&self) -> &BigRational {
        &self.d
    }

    /// True when the off-diagonal entries vanish, i.e. the map scales the
    /// two slots independently. Diagonal maps commute with each other.
    pub fn is_diagonal(&self) -> bool {
        self.b.is_zero() && self.c.is_zero()
    }

    /// The four entries rounded to `f64` (correctly rounded from the exact
    /// rationals). Used by bulk-evaluation paths; exact consumers read the
    /// rational accessors instead.
    pub fn entries_f64(&self) -> (f64, f64, f64, f64) {
        (
            rational_to_f64(&self.a),
            rational_to_f64(&self.b),
            rational_to_f64(&self.c),
            rational_to_f64(&self.d),
        )
    }

    /// Apply the map to a point. Each output coordinate is computed in exact
    /// rational arithmetic from the (exactly representable) input coordinates
    /// and rounded once; `-0.0` outputs are canonicalized.
    pub fn apply(&self, point: &PairPoint) -> PairPoint {
        let dim = point.dim();
        let mut first = Vec::with_capacity(dim);
        let mut second = Vec::with_capacity(dim);
        for j in 0..dim {
            let u = BigRational::from_float(point.first().coords()[j])
                .expect("point coordinates are finite by construction");
            let v = BigRational::from_float(point.second().coords()[j])
                .expect("point coordinates are finite by construction");
            first.push(canonical(rational_to_f64(&(&self.a * &u + &self.b * &v))));
            second.push(canonical(rational_to_f64(&(&self.c * &u + &self.d * &v))));
        }
        PairPoint::new(
            VectorElement::new(first).expect("rational combination of finite coords is finite"),
            VectorElement::new(second).expect("rational combination of finite coords is finite"),
        )
        .expect("slot dimensions preserved by a block map")
    }

    /// Matrix product `self * rhs`: the map that applies `rhs` first and
    /// `self` second. Exact in the rational entries.
    pub fn compose(&self, rhs: &Self) -> Self {
        Self::new(
            &self.a * &rhs.a + &self.b * &rhs.c,
            &self.a * &rhs.b + &self.b * &rhs.d,
            &self.c * &rhs.a + &self.d * &rhs.c,
            &self.c * &rhs.b + &self.d * &rhs.d,
        )
    }

    /// Exact integer power by repeated squaring. `pow(0)` is the identity.
    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.compose(&base);
            }
        }
        acc
    }
}

/// Compose a sequence of `(map, multiplicity)` factors in the given order:
/// the first entry is the outermost factor of the product. All arithmetic is
/// exact; when every map is diagonal the result is order-independent.
pub fn compose_maps(maps: &[(ArgMap, u32)]) -> ArgMap {
    let mut acc = ArgMap::identity();
    for (map, multiplicity) in maps {
        acc = acc.compose(&map.pow(*multiplicity));
    }
    acc
}

/// Correctly rounded conversion of an exact rational to `f64`.
pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Magnitudes beyond f64 range only arise from pathological inputs;
        // saturate with the correct sign so callers observe the blow-up.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
