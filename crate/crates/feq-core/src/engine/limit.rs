//! Geometric-tail-bounded extraction of the iteration limit.
//!
//! Iterating the operator on an admissible model produces a Cauchy sequence
//! whose tail at step `n` is bounded by the summed majorant transport
//! `Σ_{i≥n} (Λⁱ·bound)(point)`. The extractor runs the iteration with that
//! tail as the stopping certificate and returns the limit value together
//! with the per-step history.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::domain::{
    evaluate_model, l2, l2_diff, BoundSpec, FunctionModel, OperatorSpec, PairPoint,
    PerturbationSpec,
};
use crate::error::DomainError;

use super::error::EngineError;
use super::lambda::eigenfactor;
use super::levels::LevelExpansion;
use super::operator::{apply_operator, check_finite};
use super::transport::{rational_coords, CoreTransport, FactorizedBound};

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The tail bound fell below the requested tolerance (includes exact
    /// fixed-point detection, where the remaining tail is zero).
    TailBelowTol,
    /// The iteration budget ran out first.
    MaxIter,
    /// Step sizes kept growing; the iteration is not contracting.
    DivergenceDetected,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::TailBelowTol => "tail-below-tol",
            StopReason::MaxIter => "max-iter",
            StopReason::DivergenceDetected => "divergence-detected",
        }
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-step history of one extraction.
///
/// Rows cover `n = 0..=N`: `values[n]` is the `n`-th iterate at the point,
/// `deltas[n] = ‖values[n] − values[n+1]‖` (the final row uses one hidden
/// lookahead iterate, so every row has a delta), `lambda_bounds[n]` is the
/// transported bound `(Λⁿ·bound)(point)`, and `tail_bounds[n]` estimates the
/// remaining tail `Σ_{i≥n} (Λⁱ·bound)(point)` — except on rows where the
/// iterate is detected to be an exact fixed point, where the true remaining
/// error, zero, is recorded.
///
/// For admissible models every `deltas[n] ≤ lambda_bounds[n] + 1e-9`, and
/// with a contraction factor below one the tail bounds are nonincreasing.
/// A trace attached to a divergence error has no lookahead iterate, so its
/// final delta is NaN.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub point: PairPoint,
    pub values: Vec<Vec<f64>>,
    pub deltas: Vec<f64>,
    pub lambda_bounds: Vec<f64>,
    pub tail_bounds: Vec<f64>,
    pub stop_reason: StopReason,
}

pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_DEPTH_CAP: u32 = 18;

/// Iteration budgets: `max_iter` bounds the number of operator applications;
/// `depth_cap` bounds expansion depth for non-diagonal (non-commuting) maps,
/// whose path family grows exponentially.
#[derive(Debug, Clone, Copy)]
pub struct IterationLimits {
    pub max_iter: usize,
    pub depth_cap: u32,
}

impl Default for IterationLimits {
    fn default() -> Self {
        IterationLimits {
            max_iter: DEFAULT_MAX_ITER,
            depth_cap: DEFAULT_DEPTH_CAP,
        }
    }
}

/// Extract the iteration limit at one point, with full per-step history.
///
/// Returns the converged value with guaranteed error at most `tol` (the
/// geometric tail at the stopping step), provided the model satisfies the
/// bound admissibility hypothesis `‖f − Tf‖ ≤ bound` — the condition that
/// makes the tail a certificate. Fails with `NotContractive` when the
/// closed-form factor is ≥ 1 or step sizes keep growing, and with
/// `MaxIterations` when the budget runs out first.
pub fn limit_value(
    spec: &OperatorSpec,
    model: &FunctionModel,
    bound: &BoundSpec,
    point: &PairPoint,
    tol: f64,
    limits: &IterationLimits,
) -> Result<(Vec<f64>, IterationTrace), EngineError> {
    let mut cache = LevelCache::new(spec, bound, model);
    let (mut values, trace) = extract(
        spec,
        model,
        bound,
        std::slice::from_ref(point),
        tol,
        limits,
        true,
        &mut cache,
    )?;
    Ok((
        values.pop().expect("one result per input point"),
        trace.expect("trace requested"),
    ))
}

/// Batched extraction over many points, sharing the level expansion and core
/// transport across the whole grid. Values are identical to point-by-point
/// extraction.
pub(crate) fn extract_grid(
    spec: &OperatorSpec,
    model: &FunctionModel,
    bound: &BoundSpec,
    points: &[PairPoint],
    tol: f64,
    limits: &IterationLimits,
) -> Result<Vec<Vec<f64>>, EngineError> {
    let mut cache = LevelCache::new(spec, bound, model);
    Ok(extract(spec, model, bound, points, tol, limits, false, &mut cache)?.0)
}

/// `‖f(point) − (Tf)(point)‖`: pointwise defect of a model under the
/// operator. Infinite if the evaluation leaves the finite range.
pub fn defect(spec: &OperatorSpec, model: &FunctionModel, point: &PairPoint) -> f64 {
    let value = evaluate_model(model, point);
    match apply_operator(spec, |q| evaluate_model(model, q), point) {
        Ok(applied) => l2_diff(&value, &applied),
        Err(_) => f64::INFINITY,
    }
}

/// Memoizing fixed-point evaluator: the limit function as a queryable map.
///
/// Values are cached per exact point bit pattern — argument maps generate
/// exact query points, so no interpolation is ever involved. Extraction runs
/// at an internal tolerance of `tolerance/(1 + Σ|coefᵢ|)`, which makes every
/// cached value `v` satisfy the fixed-point residual
/// `‖v − (T·K)(point)‖ ≤ 2·tolerance` when the operator is re-applied to the
/// evaluator itself. Evaluation is deterministic given the spec, model, and
/// tolerance; concurrent queries may duplicate work but never lose updates.
pub struct LimitEvaluator {
    spec: OperatorSpec,
    model: FunctionModel,
    bound: BoundSpec,
    tolerance: f64,
    inner_tol: f64,
    limits: IterationLimits,
    cache: Mutex<HashMap<Vec<u64>, Vec<f64>>>,
    /// Level ladder shared by all queries; see [`LevelCache`].
    levels: Mutex<LevelCache>,
}

impl LimitEvaluator {
    pub fn new(
        spec: OperatorSpec,
        model: FunctionModel,
        bound: BoundSpec,
        tolerance: f64,
        limits: IterationLimits,
    ) -> Result<Self, DomainError> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(DomainError::InvalidParameter {
                name: "tolerance",
                value: tolerance,
                requirement: "must be finite and positive",
            });
        }
        let inner_tol = tolerance / (1.0 + spec.abs_coef_sum());
        let levels = Mutex::new(LevelCache::new(&spec, &bound, &model));
        Ok(LimitEvaluator {
            spec,
            model,
            bound,
            tolerance,
            inner_tol,
            limits,
            cache: Mutex::new(HashMap::new()),
            levels,
        })
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn model(&self) -> &FunctionModel {
        &self.model
    }

    pub fn bound(&self) -> &BoundSpec {
        &self.bound
    }

    /// The limit value at a point (cached).
    pub fn value(&self, point: &PairPoint) -> Result<Vec<f64>, EngineError> {
        let key = point.bit_key();
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        // Compute under the level-ladder lock; identical recomputation is
        // harmless because extraction is deterministic.
        let mut levels = self.levels.lock().expect("level cache lock");
        let value = extract(
            &self.spec,
            &self.model,
            &self.bound,
            std::slice::from_ref(point),
            self.inner_tol,
            &self.limits,
            false,
            &mut levels,
        )?
        .0
        .pop()
        .expect("one result per input point");
        drop(levels);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key, value.clone());
        Ok(value)
    }
}

// ---------------------------------------------------------------------------
// Iteration driver
// ---------------------------------------------------------------------------

/// Noise floor below which step deltas are rounding fuzz rather than signal.
fn delta_floor(value_norm: f64) -> f64 {
    1e3 * f64::EPSILON * value_norm.max(1.0)
}

struct PointState {
    /// Exact coordinates for the core transport.
    u_rat: Vec<num::BigRational>,
    v_rat: Vec<num::BigRational>,
    /// Per-point bound/envelope term factors (diagonal transport).
    pt_bound: Vec<f64>,
    pt_env: Vec<f64>,
    active: bool,
    result: Option<Vec<f64>>,
    core_cache: Option<Vec<f64>>,
    prev_value: Option<Vec<f64>>,
    prev_delta: Option<f64>,
    prev_lambda: Option<f64>,
    ratio_window: Vec<f64>,
    growth_streak: usize,
    zero_streak: usize,
    last_tail: f64,
}

/// Per-level data shared across all points.
struct LevelData {
    weights: Vec<f64>,
    abs_weights: Vec<f64>,
    maps: Vec<(f64, f64, f64, f64)>,
    /// Flattened per-entry bound term factors (entry-major).
    entf_bound: Vec<f64>,
    entf_env: Vec<f64>,
    bound_terms: usize,
    env_terms: usize,
}

/// Lazily grown ladder of [`LevelData`] rows, shared across extraction
/// calls for one (spec, bound, perturbation-envelope) triple. Levels are
/// deterministic functions of the spec, so memoizing them changes nothing
/// numerically — it only avoids recomposing the expansion from scratch for
/// every queried point, which dominates the cost of pointwise evaluators.
pub(crate) struct LevelCache {
    exp: LevelExpansion,
    diagonal: bool,
    fbound: FactorizedBound,
    fenv: Option<FactorizedBound>,
    levels: Vec<LevelData>,
}

impl LevelCache {
    pub(crate) fn new(spec: &OperatorSpec, bound: &BoundSpec, model: &FunctionModel) -> Self {
        LevelCache {
            exp: LevelExpansion::new(spec),
            diagonal: spec.all_diagonal(),
            fbound: FactorizedBound::new(bound),
            fenv: model
                .perturbation()
                .map(|p| FactorizedBound::new(&p.envelope)),
            levels: Vec::new(),
        }
    }

    /// Level `n`, building intermediate levels as needed. A failed step
    /// (entry-count guard) leaves the expansion unchanged, so the error is
    /// deterministic on retry.
    fn level(&mut self, n: usize) -> Result<&LevelData, EngineError> {
        while self.levels.len() <= n {
            if !self.levels.is_empty() {
                self.exp.step()?;
            }
            self.levels.push(LevelData::build(
                &self.exp,
                self.diagonal,
                &self.fbound,
                self.fenv.as_ref(),
            ));
        }
        Ok(&self.levels[n])
    }
}

impl LevelData {
    fn build(
        exp: &LevelExpansion,
        diagonal: bool,
        fbound: &FactorizedBound,
        fenv: Option<&FactorizedBound>,
    ) -> Self {
        let entries = exp.entries();
        let mut data = LevelData {
            weights: Vec::with_capacity(entries.len()),
            abs_weights: Vec::with_capacity(entries.len()),
            maps: Vec::with_capacity(entries.len()),
            entf_bound: Vec::new(),
            entf_env: Vec::new(),
            bound_terms: 0,
            env_terms: 0,
        };
        for entry in &entries {
            data.weights.push(entry.weight);
            data.abs_weights.push(entry.abs_weight);
            data.maps.push(entry.map.entries_f64());
            if diagonal {
                let fb = fbound.map_factors(&entry.map);
                data.bound_terms = fb.len();
                data.entf_bound.extend(fb);
                if let Some(fe) = fenv {
                    let fe = fe.map_factors(&entry.map);
                    data.env_terms = fe.len();
                    data.entf_env.extend(fe);
                }
            }
        }
        data
    }

    fn len(&self) -> usize {
        self.weights.len()
    }
}

#[allow(clippy::too_many_arguments)]
fn extract(
    spec: &OperatorSpec,
    model: &FunctionModel,
    bound: &BoundSpec,
    points: &[PairPoint],
    tol: f64,
    limits: &IterationLimits,
    want_trace: bool,
    cache: &mut LevelCache,
) -> Result<(Vec<Vec<f64>>, Option<IterationTrace>), EngineError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(EngineError::Domain(DomainError::InvalidParameter {
            name: "tol",
            value: tol,
            requirement: "must be finite and positive",
        }));
    }
    debug_assert!(!want_trace || points.len() == 1);
    if points.is_empty() {
        return Ok((Vec::new(), None));
    }
    let slot_dim = model.slot_dim();
    for p in points {
        if p.dim() != slot_dim {
            return Err(EngineError::Domain(DomainError::DimensionMismatch {
                expected: slot_dim,
                found: p.dim(),
            }));
        }
    }
    let eigen = match eigenfactor(spec, bound) {
        Some(c) if c >= 1.0 => {
            return Err(EngineError::NotContractive {
                factor: c,
                trace: None,
            })
        }
        other => other,
    };

    let diagonal = spec.all_diagonal();
    let perturbation = model.perturbation();
    let mut core = CoreTransport::new(spec, model);

    let mut states: Vec<PointState> = points
        .iter()
        .map(|q| PointState {
            u_rat: rational_coords(q.first().coords()),
            v_rat: rational_coords(q.second().coords()),
            pt_bound: if diagonal {
                cache
                    .fbound
                    .point_factors(q.first().norm(), q.second().norm())
            } else {
                Vec::new()
            },
            pt_env: match (&cache.fenv, diagonal) {
                (Some(fe), true) => fe.point_factors(q.first().norm(), q.second().norm()),
                _ => Vec::new(),
            },
            active: true,
            result: None,
            core_cache: None,
            prev_value: None,
            prev_delta: None,
            prev_lambda: None,
            ratio_window: Vec::new(),
            growth_streak: 0,
            zero_streak: 0,
            last_tail: f64::INFINITY,
        })
        .collect();

    // Trace rows (single-point mode only).
    let mut trace_values: Vec<Vec<f64>> = Vec::new();
    let mut trace_lambdas: Vec<f64> = Vec::new();
    let mut trace_tails: Vec<f64> = Vec::new();

    // Scratch buffers for mapped coordinates.
    let mut u_buf = vec![0.0f64; slot_dim];
    let mut v_buf = vec![0.0f64; slot_dim];

    let mut hit_max_iter = false;
    let mut n: usize = 0;
    loop {
        let level = cache.level(n)?;
        // Exact fixed point: once the core stops moving and there is no
        // perturbation, the iterate is the limit — remaining tail is zero.
        let exact_fixed = core.is_fixed() && perturbation.is_none();

        let mut any_active = false;
        for (q, st) in points.iter().zip(states.iter_mut()) {
            if !st.active {
                continue;
            }
            let (value, lambda) = evaluate_level(
                q,
                st,
                level,
                bound,
                perturbation,
                &core,
                diagonal,
                &mut u_buf,
                &mut v_buf,
            )?;

            let delta = st.prev_value.as_ref().map(|prev| l2_diff(prev, &value));
            let tail = if exact_fixed {
                0.0
            } else if let Some(c) = eigen {
                lambda / (1.0 - c)
            } else {
                measured_tail(st, lambda, diagonal)
            };

            if want_trace {
                trace_values.push(value.clone());
                trace_lambdas.push(lambda);
                trace_tails.push(tail);
            }

            // Divergence accounting: growing step sizes above the noise
            // floor, five levels in a row.
            if let (Some(d), Some(pd)) = (delta, st.prev_delta) {
                let floor = delta_floor(l2(&value));
                if d > pd && d > floor && pd > floor {
                    st.growth_streak += 1;
                    if st.growth_streak >= 5 {
                        let factor = d / pd;
                        let trace = want_trace.then(|| {
                            Box::new(finish_trace(
                                points[0].clone(),
                                trace_values.clone(),
                                trace_lambdas.clone(),
                                trace_tails.clone(),
                                StopReason::DivergenceDetected,
                            ))
                        });
                        return Err(EngineError::NotContractive { factor, trace });
                    }
                } else {
                    st.growth_streak = 0;
                }
            }

            st.prev_delta = delta;
            st.prev_lambda = Some(lambda);
            st.last_tail = tail;

            if tail <= tol {
                st.result = Some(value);
                st.active = false;
            } else {
                st.prev_value = Some(value);
                any_active = true;
            }
        }

        if !any_active {
            break;
        }
        if n >= limits.max_iter {
            hit_max_iter = true;
            break;
        }
        if !diagonal && (n as u32 + 1) > limits.depth_cap {
            return Err(EngineError::DepthCapExceeded {
                requested: n as u32 + 1,
                cap: limits.depth_cap,
            });
        }
        core.step();
        n += 1;
    }

    // One hidden lookahead iterate so the final trace row has a delta. The
    // depth cap is not re-checked: a single level past an accepted stopping
    // row is part of the trace contract.
    let lookahead = if want_trace {
        core.step();
        let level = cache.level(n + 1)?;
        let (value, _) = evaluate_level(
            &points[0],
            &mut states[0],
            level,
            bound,
            perturbation,
            &core,
            diagonal,
            &mut u_buf,
            &mut v_buf,
        )?;
        Some(value)
    } else {
        None
    };

    if hit_max_iter {
        let last_tail = states
            .iter()
            .filter(|s| s.active)
            .map(|s| s.last_tail)
            .fold(0.0f64, f64::max);
        let trace = lookahead.map(|value| {
            let mut values = trace_values;
            values.push(value);
            Box::new(finish_trace(
                points[0].clone(),
                values,
                trace_lambdas,
                trace_tails,
                StopReason::MaxIter,
            ))
        });
        return Err(EngineError::MaxIterations {
            max_iter: limits.max_iter,
            last_tail,
            trace,
        });
    }

    let trace = lookahead.map(|value| {
        let mut values = trace_values;
        values.push(value);
        finish_trace(
            points[0].clone(),
            values,
            trace_lambdas,
            trace_tails,
            StopReason::TailBelowTol,
        )
    });

    let results = states
        .into_iter()
        .map(|s| s.result.expect("every point stopped with a result"))
        .collect();
    Ok((results, trace))
}

/// Tail estimate from measured transport ratios when no closed-form factor
/// exists: `lambda/(1 - ĉ)` with `ĉ` the largest of the last three measured
/// ratios. Vanished transport is trusted immediately for diagonal maps
/// (norm scaling keeps it vanished) and after a run of zeros otherwise.
fn measured_tail(st: &mut PointState, lambda: f64, diagonal: bool) -> f64 {
    if lambda == 0.0 {
        st.zero_streak += 1;
        if diagonal || st.zero_streak >= 8 {
            return 0.0;
        }
        return f64::INFINITY;
    }
    st.zero_streak = 0;
    if let Some(prev) = st.prev_lambda {
        if prev > 0.0 {
            st.ratio_window.push(lambda / prev);
            if st.ratio_window.len() > 3 {
                st.ratio_window.remove(0);
            }
        }
    }
    let c_hat = st.ratio_window.iter().cloned().fold(0.0f64, f64::max);
    if st.ratio_window.is_empty() || c_hat >= 1.0 {
        f64::INFINITY
    } else {
        lambda / (1.0 - c_hat)
    }
}

/// Evaluate the current level at one point: the iterate value (core plus
/// transported perturbation) and the transported bound.
#[allow(clippy::too_many_arguments)]
fn evaluate_level(
    q: &PairPoint,
    st: &mut PointState,
    level: &LevelData,
    bound: &BoundSpec,
    perturbation: Option<&PerturbationSpec>,
    core: &CoreTransport,
    diagonal: bool,
    u_buf: &mut [f64],
    v_buf: &mut [f64],
) -> Result<(Vec<f64>, f64), EngineError> {
    // Core part: exact transport, cached while the form is fixed.
    let core_value = match (&st.core_cache, core.is_fixed()) {
        (Some(cached), true) => cached.clone(),
        _ => {
            let fresh = core.values(&st.u_rat, &st.v_rat);
            st.core_cache = Some(fresh.clone());
            fresh
        }
    };

    let mut value = core_value;
    let mut lambda = 0.0f64;
    let u = q.first().coords();
    let v = q.second().coords();
    for k in 0..level.len() {
        let (a, b, c, d) = level.maps[k];
        if diagonal {
            for i in 0..u.len() {
                u_buf[i] = a * u[i];
                v_buf[i] = d * v[i];
            }
            let jb = level.bound_terms;
            let mu =
                FactorizedBound::combine(&st.pt_bound, &level.entf_bound[k * jb..(k + 1) * jb]);
            lambda += level.abs_weights[k] * mu;
            if let Some(p) = perturbation {
                let je = level.env_terms;
                let env =
                    FactorizedBound::combine(&st.pt_env, &level.entf_env[k * je..(k + 1) * je]);
                p.accumulate_with_env(env, u_buf, v_buf, level.weights[k], &mut value);
            }
        } else {
            for i in 0..u.len() {
                u_buf[i] = a * u[i] + b * v[i];
                v_buf[i] = c * u[i] + d * v[i];
            }
            let nu = l2(u_buf);
            let nv = l2(v_buf);
            lambda += level.abs_weights[k] * bound.value_at_norms(nu, nv);
            if let Some(p) = perturbation {
                let env = p.envelope.value_at_norms(nu, nv);
                p.accumulate_with_env(env, u_buf, v_buf, level.weights[k], &mut value);
            }
        }
    }
    check_finite(&value, q)?;
    Ok((value, lambda))
}

fn finish_trace(
    point: PairPoint,
    values: Vec<Vec<f64>>,
    lambdas: Vec<f64>,
    tails: Vec<f64>,
    stop_reason: StopReason,
) -> IterationTrace {
    // The values list carries one lookahead row beyond the reported rows
    // (except on divergence, where the final reported row has no lookahead
    // and its delta is NaN).
    let rows = lambdas.len();
    let mut deltas = Vec::with_capacity(rows);
    for i in 0..rows {
        if i + 1 < values.len() {
            deltas.push(l2_diff(&values[i], &values[i + 1]));
        } else {
            deltas.push(f64::NAN);
        }
    }
    let mut values = values;
    values.truncate(rows);
    IterationTrace {
        point,
        values,
        deltas,
        lambda_bounds: lambdas,
        tail_bounds: tails,
        stop_reason,
    }
}
