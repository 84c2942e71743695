//! Applying the operator and its powers to arbitrary evaluatable functions.

use crate::domain::{ArgMap, OperatorSpec, PairPoint};

use super::error::EngineError;
use super::levels::level_entries;

/// Evaluate one operator application: `Σᵢ coefᵢ · f(mapᵢ(point))`.
///
/// Linear in `f`. Transformed points are produced by the exact-rational map
/// application, so repeated calls see bitwise-identical query points.
pub fn apply_operator<F>(
    spec: &OperatorSpec,
    f: F,
    point: &PairPoint,
) -> Result<Vec<f64>, EngineError>
where
    F: Fn(&PairPoint) -> Vec<f64>,
{
    let mut acc: Option<Vec<f64>> = None;
    for term in spec.terms() {
        let moved = term.map.apply(point);
        let value = f(&moved);
        check_finite(&value, &moved)?;
        match &mut acc {
            None => acc = Some(value.iter().map(|v| term.coef * v).collect()),
            Some(acc) => {
                if acc.len() != value.len() {
                    return Err(EngineError::Domain(
                        crate::error::DomainError::DimensionMismatch {
                            expected: acc.len(),
                            found: value.len(),
                        },
                    ));
                }
                for (a, v) in acc.iter_mut().zip(&value) {
                    *a += term.coef * v;
                }
            }
        }
    }
    // OperatorSpec validates non-emptiness, so acc is always set.
    Ok(acc.expect("operator has at least one term"))
}

/// Evaluate the `n`-th operator power at a point.
///
/// For diagonal (commuting) maps the evaluation collapses: paths composing to
/// the same map are merged with exactly accumulated weights, so the term
/// count is polynomial in `n` instead of `mⁿ`. Non-diagonal maps fall back to
/// the naive recursion, which is capped at `depth_cap` applications.
pub fn operator_power<F>(
    spec: &OperatorSpec,
    f: F,
    point: &PairPoint,
    n: u32,
    depth_cap: u32,
) -> Result<Vec<f64>, EngineError>
where
    F: Fn(&PairPoint) -> Vec<f64>,
{
    if n == 0 {
        let value = f(point);
        check_finite(&value, point)?;
        return Ok(value);
    }
    if !spec.all_diagonal() {
        return operator_power_naive(spec, f, point, n, depth_cap);
    }
    let entries = level_entries(spec, n, depth_cap)?;
    let mut acc: Option<Vec<f64>> = None;
    for entry in &entries {
        let moved = entry.map.apply(point);
        let value = f(&moved);
        check_finite(&value, &moved)?;
        match &mut acc {
            None => acc = Some(value.iter().map(|v| entry.weight * v).collect()),
            Some(acc) => {
                for (a, v) in acc.iter_mut().zip(&value) {
                    *a += entry.weight * v;
                }
            }
        }
    }
    Ok(acc.expect("level expansion is never empty"))
}

/// Reference implementation of the operator power: the plain `m`-ary
/// recursion over all `mⁿ` composition paths, with no path merging. Each
/// path's argument maps are composed in exact rational arithmetic and
/// applied to the point once, so the function is queried at the true path
/// point rounded a single time — the same query points the merged
/// evaluation produces. Exponential; refuses `n` beyond `depth_cap`. Kept
/// as the oracle the collapsed evaluation is tested against.
pub fn operator_power_naive<F>(
    spec: &OperatorSpec,
    f: F,
    point: &PairPoint,
    n: u32,
    depth_cap: u32,
) -> Result<Vec<f64>, EngineError>
where
    F: Fn(&PairPoint) -> Vec<f64>,
{
    if n > depth_cap {
        return Err(EngineError::DepthCapExceeded {
            requested: n,
            cap: depth_cap,
        });
    }
    fn recurse<F>(
        spec: &OperatorSpec,
        f: &F,
        point: &PairPoint,
        composed: &ArgMap,
        coef_product: f64,
        n: u32,
        acc: &mut Option<Vec<f64>>,
    ) -> Result<(), EngineError>
    where
        F: Fn(&PairPoint) -> Vec<f64>,
    {
        if n == 0 {
            let moved = composed.apply(point);
            let value = f(&moved);
            check_finite(&value, &moved)?;
            match acc {
                None => *acc = Some(value.iter().map(|v| coef_product * v).collect()),
                Some(acc) => {
                    if acc.len() != value.len() {
                        return Err(EngineError::Domain(
                            crate::error::DomainError::DimensionMismatch {
                                expected: acc.len(),
                                found: value.len(),
                            },
                        ));
                    }
                    for (a, v) in acc.iter_mut().zip(&value) {
                        *a += coef_product * v;
                    }
                }
            }
            return Ok(());
        }
        for term in spec.terms() {
            // The new application wraps the path composed so far.
            let child = term.map.compose(composed);
            recurse(spec, f, point, &child, coef_product * term.coef, n - 1, acc)?;
        }
        Ok(())
    }
    let mut acc: Option<Vec<f64>> = None;
    recurse(spec, &f, point, &ArgMap::identity(), 1.0, n, &mut acc)?;
    Ok(acc.expect("operator has at least one term"))
}

pub(crate) fn check_finite(value: &[f64], point: &PairPoint) -> Result<(), EngineError> {
    for (k, &v) in value.iter().enumerate() {
        if !v.is_finite() {
            return Err(EngineError::NonFinite {
                point: point.clone(),
                detail: format!("component {k} evaluated to {v}"),
            });
        }
    }
    Ok(())
}
