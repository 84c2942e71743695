//! The majorant operator: absolute-coefficient transport of bounds, its
//! eigenfactor, and the summed majorant series.

use crate::domain::{BoundSpec, OperatorSpec, PairPoint};

use super::error::EngineError;
use super::levels::LevelExpansion;
use super::limit::IterationLimits;

/// Apply the majorant operator to a nonnegative function:
/// `Σᵢ |coefᵢ| · delta(mapᵢ(point))`. Monotone in `delta`.
pub fn apply_lambda<D>(spec: &OperatorSpec, delta: D, point: &PairPoint) -> f64
where
    D: Fn(&PairPoint) -> f64,
{
    spec.terms()
        .iter()
        .map(|t| t.coef.abs() * delta(&t.map.apply(point)))
        .sum()
}

/// [`apply_lambda`] specialized to a bound.
pub fn apply_lambda_bound(spec: &OperatorSpec, bound: &BoundSpec, point: &PairPoint) -> f64 {
    apply_lambda(spec, |q| bound.value(q), point)
}

/// `n`-fold majorant transport of a bound at a point, via the merged level
/// expansion (absolute path weights).
pub fn lambda_power_bound(
    spec: &OperatorSpec,
    bound: &BoundSpec,
    point: &PairPoint,
    n: u32,
    depth_cap: u32,
) -> Result<f64, EngineError> {
    let entries = super::levels::level_entries(spec, n, depth_cap)?;
    Ok(entries
        .iter()
        .map(|e| e.abs_weight * bound.value(&e.map.apply(point)))
        .sum())
}

/// The closed-form contraction factor of the majorant transport, when one
/// exists: `c` with `Λ·bound = c·bound` at every point.
///
/// Present exactly when (a) every map is diagonal, and (b) every bound term
/// is transported by the same per-term factor
/// `Σᵢ |coefᵢ|·|aᵢ|^exp_first·|dᵢ|^exp_second` (agreement within 1e-12).
/// An identically-zero bound is transported by factor 0. The closed form is
/// cross-checked against direct transport at 8 quasi-random points before
/// being returned; disagreement yields `None`.
pub fn eigenfactor(spec: &OperatorSpec, bound: &BoundSpec) -> Option<f64> {
    if !spec.all_diagonal() {
        return None;
    }
    let mut factor: Option<f64> = None;
    for term in bound.terms() {
        if term.coef == 0.0 {
            continue;
        }
        let f: f64 = spec
            .terms()
            .iter()
            .map(|t| {
                let (a, _, _, d) = t.map.entries_f64();
                t.coef.abs()
                    * crate::domain::pow0(a.abs(), term.exp_first)
                    * crate::domain::pow0(d.abs(), term.exp_second)
            })
            .sum();
        match factor {
            None => factor = Some(f),
            Some(f0) => {
                if (f - f0).abs() > 1e-12 * f0.abs().max(1.0) {
                    return None;
                }
            }
        }
    }
    let c = factor.unwrap_or(0.0);
    // Cross-check the closed form against direct transport.
    for point in crate::lab::pair_grid(8, 2.0, 1) {
        let mu = bound.value(&point);
        let lam = apply_lambda_bound(spec, bound, &point);
        if (lam - c * mu).abs() > 1e-9 * mu.abs().max(lam.abs()).max(1.0) {
            return None;
        }
    }
    Some(c)
}

/// The summed majorant series `Σₙ (Λⁿ·bound)(point)`.
///
/// With an eigenfactor `c < 1` this is the closed form `bound(point)/(1-c)`.
/// Otherwise partial sums are accumulated until the measured increment ratio
/// `ĉ` certifies a tail `increment·ĉ/(1-ĉ) < tol`. A factor (closed-form or
/// measured over 5 consecutive increments) of 1 or more means the series
/// diverges: no stability constant exists, reported as `NotContractive`.
pub fn mu_star(
    spec: &OperatorSpec,
    bound: &BoundSpec,
    point: &PairPoint,
    tol: f64,
    limits: &IterationLimits,
) -> Result<f64, EngineError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(EngineError::Domain(
            crate::error::DomainError::InvalidParameter {
                name: "tol",
                value: tol,
                requirement: "must be finite and positive",
            },
        ));
    }
    if let Some(c) = eigenfactor(spec, bound) {
        if c >= 1.0 {
            return Err(EngineError::NotContractive {
                factor: c,
                trace: None,
            });
        }
        return Ok(bound.value(point) / (1.0 - c));
    }

    // No closed form: accumulate partial sums with measured-ratio tails.
    let mut exp = LevelExpansion::new(spec);
    let diagonal = exp.diagonal();
    let mut sum = 0.0;
    let mut prev_increment: Option<f64> = None;
    let mut ratios: Vec<f64> = Vec::new();
    let mut growth_streak = 0usize;
    let mut zero_streak = 0usize;
    for n in 0..=limits.max_iter {
        if !diagonal && n as u32 > limits.depth_cap {
            return Err(EngineError::DepthCapExceeded {
                requested: n as u32,
                cap: limits.depth_cap,
            });
        }
        let increment: f64 = exp
            .entries()
            .iter()
            .map(|e| e.abs_weight * bound.value(&e.map.apply(point)))
            .sum();
        sum += increment;
        if increment == 0.0 {
            // Diagonal maps scale slot norms, so a vanished increment stays
            // vanished; for general maps require a run of zeros before
            // trusting it.
            zero_streak += 1;
            if diagonal || zero_streak >= 8 {
                return Ok(sum);
            }
        } else {
            zero_streak = 0;
        }
        if let Some(prev) = prev_increment {
            if prev > 0.0 && increment > 0.0 {
                let ratio = increment / prev;
                if ratio >= 1.0 {
                    growth_streak += 1;
                    if growth_streak >= 5 {
                        return Err(EngineError::NotContractive {
                            factor: ratio,
                            trace: None,
                        });
                    }
                } else {
                    growth_streak = 0;
                }
                ratios.push(ratio);
                let recent = ratios.iter().rev().take(3).cloned().fold(0.0, f64::max);
                if recent < 1.0 && increment * recent / (1.0 - recent) < tol {
                    return Ok(sum);
                }
            }
        }
        prev_increment = Some(increment);
        exp.step()?;
    }
    Err(EngineError::MaxIterations {
        max_iter: limits.max_iter,
        last_tail: prev_increment.unwrap_or(f64::INFINITY),
        trace: None,
    })
}
