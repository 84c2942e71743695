//! Frozen-value tests: every number asserted here was computed independently
//! (exact decimal/rational arithmetic) and hard-coded, so these tests verify
//! the engine against values it had no hand in producing.

use feq_core::catalog::{
    thm31, thm31_factor, thm31_series_constant, thm32, thm32_factor, thm32_reference_constant,
    thm32_series_constant,
};
use feq_core::domain::{evaluate_model, ArgMap, FunctionModel, OperatorSpec, PairPoint};
use feq_core::engine::{
    apply_lambda_bound, defect, eigenfactor, lambda_power_bound, limit_value, mu_star,
    operator_power, operator_power_naive, EngineError, IterationLimits, StopReason,
};
use feq_core::lab::{default_grid, make_perturbed_model, pair_grid};

fn pt(x: f64, y: f64) -> PairPoint {
    PairPoint::of_scalars(x, y).expect("finite scalar point")
}

fn assert_close(actual: f64, expected: f64, rel: f64, what: &str) {
    let scale = expected.abs().max(1.0);
    assert!(
        (actual - expected).abs() <= rel * scale,
        "{what}: got {actual:.17e}, expected {expected:.17e} (diff {:.3e}, allowed {:.3e})",
        (actual - expected).abs(),
        rel * scale,
    );
}

/// Contraction factors for the first operator family, frozen from exact
/// decimal arithmetic: 3·(3/5)^(2p) + 2·(4/5)^(2p).
#[test]
fn first_family_contraction_factors() {
    let frozen = [
        (2.0, 1.208),
        (2.5, 0.88864),
        (3.0, 0.664256),
        (3.5, 0.5034112),
        (4.0, 0.3859328),
        (5.0, 0.2328882176),
    ];
    for &(p, expected) in &frozen {
        assert_close(thm31_factor(p), expected, 1e-12, &format!("factor(p={p})"));
        let entry = thm31(p).expect("valid parameter");
        let c = eigenfactor(&entry.spec, &entry.bound)
            .unwrap_or_else(|| panic!("closed-form factor must exist at p={p}"));
        assert_close(c, expected, 1e-12, &format!("eigenfactor(p={p})"));
        assert_close(entry.factor, expected, 1e-12, &format!("entry.factor(p={p})"));
        assert_eq!(entry.contractive, expected < 1.0, "contractive flag at p={p}");
    }
}

/// Contraction factors for the second operator family: 4·(1/2)^r.
#[test]
fn second_family_contraction_factors() {
    let frozen = [(2.5, 0.7071067811865476), (3.0, 0.5), (4.0, 0.25)];
    for &(r, expected) in &frozen {
        assert_close(thm32_factor(r), expected, 1e-12, &format!("factor(r={r})"));
        let entry = thm32(r, 0.2).expect("valid parameters");
        let c = eigenfactor(&entry.spec, &entry.bound)
            .unwrap_or_else(|| panic!("closed-form factor must exist at r={r}"));
        assert_close(c, expected, 1e-12, &format!("eigenfactor(r={r})"));
        assert_close(entry.factor, expected, 1e-12, &format!("entry.factor(r={r})"));
        assert!(entry.contractive, "contractive at r={r}");
    }
    // r = 2 sits exactly on the boundary: factor 1, not contractive.
    let boundary = thm32(2.0, 0.2).expect("valid parameters");
    assert_close(boundary.factor, 1.0, 1e-12, "factor(r=2)");
    assert!(!boundary.contractive);
}

/// Bound values and summed series for the first family at the unit point,
/// frozen from exact decimals: mu(1,1) = (12/25)^4 = 0.05308416 and
/// mu* = mu/(1 - 0.3859328) = 0.05308416/0.6140672.
#[test]
fn first_family_series_at_unit_point() {
    let entry = thm31(4.0).expect("valid parameter");
    let q = pt(1.0, 1.0);
    let mu = entry.bound.value(&q);
    assert_close(mu, 0.05308416, 1e-12, "mu(1,1) at p=4");

    let star = mu_star(
        &entry.spec,
        &entry.bound,
        &q,
        1e-10,
        &IterationLimits::default(),
    )
    .expect("series converges at p=4");
    assert!(
        (star - 0.0864468).abs() <= 1e-6,
        "mu*(1,1) at p=4: got {star}, frozen 0.0864468 +/- 1e-6"
    );
    assert_close(
        thm31_series_constant(4.0),
        star,
        1e-12,
        "series constant vs summed series at the unit point",
    );
}

/// Bound values and summed series for the second family at the point with
/// both slot norms 2, frozen from exact decimals: at r=3, rho=0.2 the
/// coefficient is (2/8)/0.8 = 0.3125, mu(2,2) = 0.3125·16 = 5, mu* = 10;
/// at rho=0 the coefficient is 0.25, mu = 4, mu* = 8.
#[test]
fn second_family_series_at_norm_two() {
    let q = pt(2.0, 2.0);
    let limits = IterationLimits::default();

    let entry = thm32(3.0, 0.2).expect("valid parameters");
    assert_close(entry.bound.value(&q), 5.0, 1e-12, "mu(2,2) at r=3, rho=0.2");
    let star = mu_star(&entry.spec, &entry.bound, &q, 1e-10, &limits).expect("converges");
    assert_close(star, 10.0, 1e-12, "mu*(2,2) at r=3, rho=0.2");

    let entry0 = thm32(3.0, 0.0).expect("valid parameters");
    assert_close(entry0.bound.value(&q), 4.0, 1e-12, "mu(2,2) at r=3, rho=0");
    let star0 = mu_star(&entry0.spec, &entry0.bound, &q, 1e-10, &limits).expect("converges");
    assert_close(star0, 8.0, 1e-12, "mu*(2,2) at r=3, rho=0");
}

/// The two closed-form stability constants for the second family disagree by
/// design; both are frozen here at r=3: series form 2^(r+1)/(2^r-4) = 4 and
/// reference form 2^(3+r)/(2^r-1) = 64/7.
#[test]
fn second_family_constant_forms() {
    assert_close(thm32_series_constant(3.0), 4.0, 1e-12, "series constant at r=3");
    assert_close(
        thm32_reference_constant(3.0),
        64.0 / 7.0,
        1e-12,
        "reference constant at r=3",
    );
    // Consistency with the summed series at norms (2,2), rho = 0.2: the
    // constant multiplies (|x/2|^r + |z/2|^r)/(1 - |rho|) = 2/0.8.
    assert_close(
        thm32_series_constant(3.0) * 2.0 / 0.8,
        10.0,
        1e-12,
        "series constant reproduces mu*(2,2)",
    );
}

/// Below the contraction threshold the series must be reported as divergent,
/// not silently summed: at p=2 the factor is 1.208.
#[test]
fn series_divergence_below_threshold() {
    let entry = thm31(2.0).expect("p=2 is a valid parameter; it just is not contractive");
    assert!(!entry.contractive);
    let q = pt(1.0, 1.0);
    let err = mu_star(
        &entry.spec,
        &entry.bound,
        &q,
        1e-10,
        &IterationLimits::default(),
    )
    .expect_err("factor 1.208 must refuse to sum");
    match err {
        EngineError::NotContractive { factor, .. } => {
            assert_close(factor, 1.208, 1e-12, "divergence factor")
        }
        other => panic!("expected NotContractive, got {other:?}"),
    }
}

/// The multiplication form f(x,y) = xy is an exact fixed point of both
/// catalog operators: frozen coefficient identities 2·(2/5·2) + (−1)·(−1/5·3)
/// + (−2)·(3/5·1) = 1 and 2·(1/2·1/2) − 2·(1/2·(−1/2)) = 1.
#[test]
fn multiplication_form_is_fixed_point() {
    let model = FunctionModel::scalar_bilinear(1.0).expect("valid model");
    for (name, entry) in [
        ("first", thm31(4.0).expect("valid")),
        ("second", thm32(3.0, 0.2).expect("valid")),
    ] {
        for q in default_grid(20, 2.0, 1) {
            let d = defect(&entry.spec, &model, &q);
            assert!(
                d <= 1e-12,
                "{name} operator: fixed-point defect {d:.3e} at {q:?}"
            );
        }
    }
}

/// One-step majorant transport at the unit point, frozen from exact
/// decimals for the first family at p=4: (Lambda mu)(1,1) = c·mu(1,1)
/// = 0.3859328 · 0.05308416 = 0.020486918504448 (exact decimal product).
#[test]
fn majorant_transport_unit_point() {
    let entry = thm31(4.0).expect("valid");
    let q = pt(1.0, 1.0);
    let lam = apply_lambda_bound(&entry.spec, &entry.bound, &q);
    assert_close(lam, 0.020486918504448, 1e-12, "(Lambda mu)(1,1) at p=4");
    // n-fold transport matches c^n · mu for n up to 6.
    for n in 0..=6u32 {
        let ln = lambda_power_bound(&entry.spec, &entry.bound, &q, n, 18).expect("in depth");
        let expected = 0.3859328f64.powi(n as i32) * 0.05308416;
        assert_close(ln, expected, 1e-11, &format!("(Lambda^{n} mu)(1,1)"));
    }
}

/// The merged (collapsed) operator-power evaluation agrees with the naive
/// m-ary recursion over all composition paths, for both catalog operators,
/// on perturbed models, through n = 6.
#[test]
fn collapsed_power_matches_naive_recursion() {
    for (name, entry) in [
        ("first", thm31(4.0).expect("valid")),
        ("second", thm32(3.0, 0.2).expect("valid")),
    ] {
        let core = feq_core::domain::CoreMatrix::scalar(1.0).expect("valid");
        let model =
            make_perturbed_model(core, &entry.spec, &entry.bound, 0.7, 42).expect("admissible");
        let f = |q: &PairPoint| evaluate_model(&model, q);
        for q in pair_grid(5, 2.0, 1) {
            for n in 0..=6u32 {
                let fast = operator_power(&entry.spec, f, &q, n, 18).expect("within caps");
                let slow = operator_power_naive(&entry.spec, f, &q, n, 18).expect("within caps");
                assert_eq!(fast.len(), slow.len());
                for (a, b) in fast.iter().zip(&slow) {
                    let scale = a.abs().max(b.abs()).max(1.0);
                    assert!(
                        (a - b).abs() <= 1e-12 * scale,
                        "{name} operator, n={n}, point {q:?}: collapsed {a:.17e} vs naive {b:.17e}"
                    );
                }
            }
        }
    }
}

/// End-to-end extraction: iterating the first-family operator on a perturbed
/// multiplication form converges to the unperturbed form, since the
/// perturbation is transported to zero. The extracted value must match
/// x·y within the requested tolerance.
#[test]
fn extraction_recovers_multiplication_form() {
    let entry = thm31(4.0).expect("valid");
    let core = feq_core::domain::CoreMatrix::scalar(1.0).expect("valid");
    let model = make_perturbed_model(core, &entry.spec, &entry.bound, 0.5, 1).expect("admissible");
    let q = pt(1.3, 0.7);
    let (value, trace) = limit_value(
        &entry.spec,
        &model,
        &entry.bound,
        &q,
        1e-10,
        &IterationLimits::default(),
    )
    .expect("converges");
    assert_eq!(value.len(), 1);
    assert!(
        (value[0] - 1.3 * 0.7).abs() <= 1e-9,
        "extracted limit {:.17e} vs product {:.17e}",
        value[0],
        1.3 * 0.7
    );
    assert_eq!(trace.stop_reason, StopReason::TailBelowTol);

    // Trace shape: every row has a delta (hidden lookahead), and each step
    // is within its transported bound plus arithmetic slack.
    let rows = trace.lambda_bounds.len();
    assert_eq!(trace.values.len(), rows);
    assert_eq!(trace.deltas.len(), rows);
    assert_eq!(trace.tail_bounds.len(), rows);
    assert!(rows >= 3, "expected several iterations, got {rows}");
    for n in 0..rows {
        assert!(trace.deltas[n].is_finite());
        assert!(
            trace.deltas[n] <= trace.lambda_bounds[n] + 1e-9,
            "step {n}: delta {:.3e} exceeds transported bound {:.3e}",
            trace.deltas[n],
            trace.lambda_bounds[n]
        );
    }
    for n in 1..rows {
        assert!(
            trace.tail_bounds[n] <= trace.tail_bounds[n - 1] * (1.0 + 1e-9),
            "tail bounds must not increase: {:?}",
            trace.tail_bounds
        );
    }
}

/// Extraction with no perturbation detects the exact fixed point and stops
/// with a zero remaining tail.
#[test]
fn pure_form_detected_as_fixed_point() {
    let entry = thm32(3.0, 0.2).expect("valid");
    let model = FunctionModel::scalar_bilinear(2.5).expect("valid");
    let q = pt(-1.5, 0.75);
    let (value, trace) = limit_value(
        &entry.spec,
        &model,
        &entry.bound,
        &q,
        1e-10,
        &IterationLimits::default(),
    )
    .expect("fixed point");
    assert_close(value[0], 2.5 * -1.5 * 0.75, 1e-12, "fixed-point value");
    assert_eq!(trace.stop_reason, StopReason::TailBelowTol);
    assert_eq!(
        *trace.tail_bounds.last().expect("nonempty"),
        0.0,
        "exact fixed point reports a zero remaining tail"
    );
}

/// Non-diagonal argument maps have no closed-form factor; the summed series
/// still converges by measured ratios when the transport contracts.
#[test]
fn measured_series_without_closed_form() {
    // One term, non-diagonal map with operator norm 1/2: f(x/2 + y/4, x/4 + y/2),
    // coefficient 3/4. Transport of |x| + |y| contracts by at most 3/4 · 3/4.
    let map = ArgMap::from_f64(0.5, 0.25, 0.25, 0.5).expect("finite entries");
    let spec = OperatorSpec::from_pairs(vec![(0.75, map)]).expect("valid spec");
    let bound = feq_core::domain::BoundSpec::from_triples(vec![(1.0, 1.0, 0.0), (1.0, 0.0, 1.0)])
        .expect("valid bound");
    assert!(eigenfactor(&spec, &bound).is_none(), "no closed form here");
    let q = pt(1.0, 1.0);
    // A contraction of 9/16 per level needs ~42 levels to push the tail
    // below 1e-10, so raise the non-diagonal depth cap accordingly.
    let limits = IterationLimits {
        max_iter: 200,
        depth_cap: 60,
    };
    let star = mu_star(&spec, &bound, &q, 1e-10, &limits)
        .expect("measured ratios certify convergence");
    // Exact value: at (1,1) each transport step multiplies the symmetric
    // bound by exactly 3/4 · 3/4 = 9/16, so the series is 2/(1 - 9/16) = 32/7.
    assert_close(star, 32.0 / 7.0, 1e-8, "measured series sum");
}
