//! Grid verification of the stability bound and of limit uniqueness.

use crate::domain::{evaluate_model, l2, l2_diff, BoundSpec, FunctionModel, OperatorSpec, PairPoint};

use super::error::EngineError;
use super::lambda::mu_star;
use super::limit::{extract_grid, IterationLimits};

/// Three-valued check outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIPPED",
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of checking `‖f − K‖ ≤ μ* ` over a grid.
///
/// `max_gap` is the largest signed `‖f − K‖ − μ*` seen (how close the bound
/// came to being tight; negative when comfortably inside), at `worst_point`.
/// `max_violation` is the largest excess beyond the allowance
/// `μ* + tol + 1e-9` (zero when the check passes); a positive value fails
/// the check with `witness` set.
#[derive(Debug, Clone)]
pub struct StabilityCheck {
    pub grid_size: usize,
    pub max_gap: f64,
    pub worst_point: Option<PairPoint>,
    pub max_violation: f64,
    pub witness: Option<PairPoint>,
    pub allowance: f64,
    pub verdict: Verdict,
}

/// Verify the stability conclusion on a grid: at every point, the distance
/// from the model to the extracted limit is at most the summed majorant
/// series. The allowance `tol + 1e-9` on top of `μ*` covers the extraction
/// error (at most `tol`) plus arithmetic slack.
///
/// Meaningful only for models that passed the admissibility audit; a FAIL on
/// an audited model indicates an engine bug.
pub fn verify_stability(
    spec: &OperatorSpec,
    model: &FunctionModel,
    bound: &BoundSpec,
    grid: &[PairPoint],
    tol: f64,
    limits: &IterationLimits,
) -> Result<StabilityCheck, EngineError> {
    let allowance = tol + 1e-9;
    let limit_values = extract_grid(spec, model, bound, grid, tol, limits)?;
    let mut check = StabilityCheck {
        grid_size: grid.len(),
        max_gap: f64::NEG_INFINITY,
        worst_point: None,
        max_violation: 0.0,
        witness: None,
        allowance,
        verdict: Verdict::Pass,
    };
    for (q, k) in grid.iter().zip(&limit_values) {
        let f = evaluate_model(model, q);
        let dist = l2_diff(&f, k);
        let star = mu_star(spec, bound, q, tol, limits)?;
        let gap = dist - star;
        if gap > check.max_gap {
            check.max_gap = gap;
            check.worst_point = Some(q.clone());
        }
        let violation = dist - (star + allowance);
        if violation > check.max_violation {
            check.max_violation = violation;
            check.witness = Some(q.clone());
            check.verdict = Verdict::Fail;
        }
    }
    Ok(check)
}

/// Result of probing limit uniqueness through two models.
#[derive(Debug, Clone)]
pub struct UniquenessCheck {
    pub grid_size: usize,
    pub max_disagreement: f64,
    pub allowance: f64,
    pub witness: Option<PairPoint>,
    pub verdict: Verdict,
}

/// Probe uniqueness of the limit: two models sharing the same bilinear core
/// (but different perturbations) must produce the same limit, since both
/// limits are fixed points within the same majorant distance of each other.
/// Extracted values may each carry up to `tol` extraction error, so
/// agreement is required within `2·tol` plus arithmetic slack.
pub fn uniqueness_probe(
    spec: &OperatorSpec,
    model_a: &FunctionModel,
    model_b: &FunctionModel,
    bound: &BoundSpec,
    grid: &[PairPoint],
    tol: f64,
    limits: &IterationLimits,
) -> Result<UniquenessCheck, EngineError> {
    if model_a.cores() != model_b.cores() {
        return Err(EngineError::CoreMismatch);
    }
    let ka = extract_grid(spec, model_a, bound, grid, tol, limits)?;
    let kb = extract_grid(spec, model_b, bound, grid, tol, limits)?;
    let mut check = UniquenessCheck {
        grid_size: grid.len(),
        max_disagreement: 0.0,
        allowance: 0.0,
        witness: None,
        verdict: Verdict::Pass,
    };
    for ((q, a), b) in grid.iter().zip(&ka).zip(&kb) {
        let disagreement = l2_diff(a, b);
        let scale = l2(a).max(l2(b)).max(1.0);
        let allowance = 2.0 * tol + 1e-12 * scale;
        check.allowance = check.allowance.max(allowance);
        if disagreement > check.max_disagreement {
            check.max_disagreement = disagreement;
            if disagreement > allowance {
                check.witness = Some(q.clone());
                check.verdict = Verdict::Fail;
            }
        }
    }
    Ok(check)
}
