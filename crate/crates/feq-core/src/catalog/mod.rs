//! Prebuilt operator/bound instantiations with closed-form contraction
//! factors and stability constants, plus residual checkers for the
//! identities their limits must satisfy.

mod residuals;

pub use residuals::{
    biadditivity_residual, fe312_bound_check, fe_residual, rho_inequality_residual,
    verify_specialization, BoundCheck, Eval, QuadPoint, Slot,
};

use std::collections::BTreeMap;

use crate::domain::{ArgMap, BoundSpec, OperatorSpec};
use crate::error::DomainError;

/// A named, ready-to-run operator/bound pair with its closed-form
/// contraction factor and the hypothesis bookkeeping for the parameters it
/// was built with.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub spec: OperatorSpec,
    pub bound: BoundSpec,
    /// The parameters the entry was instantiated with.
    pub params: BTreeMap<String, f64>,
    /// Closed-form contraction factor of the envelope transport.
    pub factor: f64,
    /// Whether the factor is strictly below 1 (extraction converges).
    pub contractive: bool,
    /// Validity-hypothesis bookkeeping: the stated parameter range and
    /// whether this instantiation satisfies it.
    pub hypothesis_note: String,
}

/// Closed-form contraction factor of the `thm31` family:
/// `3·(3/5)^{2p} + 2·(4/5)^{2p}`.
pub fn thm31_factor(p: f64) -> f64 {
    3.0 * 0.6_f64.powf(2.0 * p) + 2.0 * 0.8_f64.powf(2.0 * p)
}

/// Closed-form contraction factor of the `thm32` family: `4/2^r`.
pub fn thm32_factor(r: f64) -> f64 {
    4.0 * 0.5_f64.powf(r)
}

/// Coefficient of `‖x‖^{2p}·‖y‖^{2p}` in the summed `thm31` stability
/// bound: `(12/25)^p / (1 − factor)`.
pub fn thm31_series_constant(p: f64) -> f64 {
    (12.0_f64 / 25.0).powf(p) / (1.0 - thm31_factor(p))
}

/// Reference closed form for the same `thm31` coefficient; it coincides
/// with the series value, so the two columns of a sweep always agree.
pub fn thm31_reference_constant(p: f64) -> f64 {
    thm31_series_constant(p)
}

/// Coefficient of `(‖x/2‖^r + ‖z/2‖^r)/(1−|rho|)` in the summed `thm32`
/// stability bound: `2^{r+1}/(2^r − 4)`. Diverges (and changes sign) for
/// `r ≤ 2`, where the transport stops contracting.
pub fn thm32_series_constant(r: f64) -> f64 {
    2.0_f64.powf(r + 1.0) / (2.0_f64.powf(r) - 4.0)
}

/// Reference closed form quoted for the `thm32` coefficient,
/// `2^{3+r}/(2^r − 1)`, on the same normalization. It disagrees with the
/// series value (at `r = 3`: `64/7 ≈ 9.14` against `4`); sweeps report
/// both and flag the discrepancy.
pub fn thm32_reference_constant(r: f64) -> f64 {
    2.0_f64.powf(3.0 + r) / (2.0_f64.powf(r) - 1.0)
}

/// Single-pair reduction of the product-bounded four-point hypothesis:
/// operator `2·f(2x/5, 2y) − f(−x/5, 3y) − 2·f(3x/5, y)` with bound
/// `(12/25)^p·‖x‖^{2p}·‖y‖^{2p}`. Contractive exactly when
/// `3·(3/5)^{2p} + 2·(4/5)^{2p} < 1`; the stated validity hypothesis is
/// `p > 3`.
pub fn thm31(p: f64) -> Result<CatalogEntry, DomainError> {
    if !p.is_finite() || p <= 0.0 {
        return Err(DomainError::InvalidParameter {
            name: "p",
            value: p,
            requirement: "p > 0",
        });
    }
    let spec = OperatorSpec::from_pairs(vec![
        (2.0, ArgMap::diagonal_ratio(2, 5, 2, 1)),
        (-1.0, ArgMap::diagonal_ratio(-1, 5, 3, 1)),
        (-2.0, ArgMap::diagonal_ratio(3, 5, 1, 1)),
    ])?;
    let bound = BoundSpec::from_triples(vec![((12.0_f64 / 25.0).powf(p), 2.0 * p, 2.0 * p)])?;
    let factor = thm31_factor(p);
    let hypothesis_note = if p > 3.0 {
        format!("hypothesis p > 3: satisfied (p = {p})")
    } else {
        format!(
            "hypothesis p > 3: not satisfied (p = {p}); extraction still \
             converges whenever the contraction factor stays below 1"
        )
    };
    let mut params = BTreeMap::new();
    params.insert("p".to_string(), p);
    params.insert("a".to_string(), -0.2);
    Ok(CatalogEntry {
        name: "thm31".to_string(),
        spec,
        bound,
        params,
        factor,
        contractive: factor < 1.0,
        hypothesis_note,
    })
}

/// Single-pair reduction of the rho-inequality hypothesis: operator
/// `2·f(x/2, y/2) − 2·f(x/2, −y/2)` with bound
/// `2·(1/2)^r·(‖x‖^r + ‖y‖^r)/(1−|rho|)`. Contractive exactly when
/// `4/2^r < 1`, i.e. `r > 2`; `|rho| < 1` is required for the bound to be
/// defined at all.
pub fn thm32(r: f64, rho: f64) -> Result<CatalogEntry, DomainError> {
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(DomainError::InvalidParameter {
            name: "rho",
            value: rho,
            requirement: "|rho| < 1 (the bound divides by 1 - |rho|)",
        });
    }
    if !r.is_finite() || r < 0.0 {
        return Err(DomainError::InvalidParameter {
            name: "r",
            value: r,
            requirement: "r >= 0 and finite",
        });
    }
    let spec = OperatorSpec::from_pairs(vec![
        (2.0, ArgMap::diagonal_ratio(1, 2, 1, 2)),
        (-2.0, ArgMap::diagonal_ratio(1, 2, -1, 2)),
    ])?;
    let coef = 2.0 * 0.5_f64.powf(r) / (1.0 - rho.abs());
    let bound = BoundSpec::from_triples(vec![(coef, r, 0.0), (coef, 0.0, r)])?;
    let factor = thm32_factor(r);
    let hypothesis_note = if r > 2.0 {
        format!("hypothesis r > 2: satisfied (r = {r}, rho = {rho})")
    } else {
        format!(
            "hypothesis r > 2: not satisfied (r = {r}); the contraction \
             factor 4/2^r is at least 1, so no limit extraction is possible"
        )
    };
    let mut params = BTreeMap::new();
    params.insert("r".to_string(), r);
    params.insert("rho".to_string(), rho);
    Ok(CatalogEntry {
        name: "thm32".to_string(),
        spec,
        bound,
        params,
        factor,
        contractive: factor < 1.0,
        hypothesis_note,
    })
}
