//! Internal transports used by limit extraction.
//!
//! Iterating the operator on a bilinear-plus-perturbation model is evaluated
//! in two decoupled parts:
//!
//! * **Core**: applying the operator to a bilinear form yields another
//!   bilinear form, so the core is transported as a quadratic form on the
//!   stacked slot vector, with exact rational coefficients. Expanding the
//!   core through the level family instead would sum enormous cancelling
//!   terms and drown the answer in rounding noise; the exact recurrence is
//!   immune to that, and for operators that fix the core it is bit-stable.
//!
//! * **Bounds/envelopes**: diagonal maps scale slot norms, so a power-sum
//!   bound transported through a composed map factors into a per-point part
//!   and a per-map part. Precomputing both removes all `powf` calls from the
//!   innermost loops.

use num::rational::BigRational;
use num::Zero;

use crate::domain::{pow0, ArgMap, BoundSpec, FunctionModel, OperatorSpec};

type Rat = BigRational;

fn rat(x: f64) -> Rat {
    Rat::from_float(x).expect("finite by construction")
}

/// One output component's quadratic form on the stacked vector `[u; v]`,
/// stored as four `dim x dim` rational blocks (row-major).
#[derive(Clone, PartialEq)]
struct QForm {
    uu: Vec<Rat>,
    uv: Vec<Rat>,
    vu: Vec<Rat>,
    vv: Vec<Rat>,
}

impl QForm {
    fn from_core(entries: &[f64], dim: usize) -> Self {
        let two = Rat::from_integer(2.into());
        let mut uv = vec![Rat::zero(); dim * dim];
        let mut vu = vec![Rat::zero(); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let half = rat(entries[i * dim + j]) / &two;
                uv[i * dim + j] = half.clone();
                vu[j * dim + i] = half;
            }
        }
        QForm {
            uu: vec![Rat::zero(); dim * dim],
            uv,
            vu,
            vv: vec![Rat::zero(); dim * dim],
        }
    }

    fn zeros(dim: usize) -> Self {
        QForm {
            uu: vec![Rat::zero(); dim * dim],
            uv: vec![Rat::zero(); dim * dim],
            vu: vec![Rat::zero(); dim * dim],
            vv: vec![Rat::zero(); dim * dim],
        }
    }
}

fn block_combine(out: &mut [Rat], s1: &Rat, b1: &[Rat], s2: &Rat, b2: &[Rat]) {
    for (o, (x, y)) in out.iter_mut().zip(b1.iter().zip(b2)) {
        *o += s1 * x + s2 * y;
    }
}

/// Exact transport of the bilinear core through operator applications.
pub(crate) struct CoreTransport {
    dim: usize,
    coefs: Vec<Rat>,
    maps: Vec<(Rat, Rat, Rat, Rat)>,
    comps: Vec<QForm>,
    /// True once a step left every component unchanged: the core is an exact
    /// fixed point of the operator and all further steps are identity.
    fixed: bool,
}

impl CoreTransport {
    pub fn new(spec: &OperatorSpec, model: &FunctionModel) -> Self {
        let dim = model.slot_dim();
        CoreTransport {
            dim,
            coefs: spec.terms().iter().map(|t| rat(t.coef)).collect(),
            maps: spec
                .terms()
                .iter()
                .map(|t| (t.map.a().clone(), t.map.b().clone(), t.map.c().clone(), t.map.d().clone()))
                .collect(),
            comps: model
                .cores()
                .iter()
                .map(|c| QForm::from_core(c.entries(), dim))
                .collect(),
            fixed: false,
        }
    }

    pub fn is_fixed(&self) -> bool {
        self.fixed
    }

    /// Apply one operator step to every component's quadratic form:
    /// `Q ← Σᵢ coefᵢ · M̂ᵢᵀ Q M̂ᵢ` where `M̂ᵢ` is the scalar-block matrix
    /// `[[aᵢI, bᵢI], [cᵢI, dᵢI]]`.
    pub fn step(&mut self) {
        if self.fixed {
            return;
        }
        let dim = self.dim;
        let mut all_equal = true;
        for q in &mut self.comps {
            let mut next = QForm::zeros(dim);
            for (coef, (a, b, c, d)) in self.coefs.iter().zip(&self.maps) {
                let ca = coef * a;
                let cb = coef * b;
                let cc = coef * c;
                let cd = coef * d;
                // Row mixes of the current blocks, scaled by the coefficient.
                let mut ru_u = vec![Rat::zero(); dim * dim]; // coef·(a·Quu + c·Qvu)
                let mut ru_v = vec![Rat::zero(); dim * dim]; // coef·(a·Quv + c·Qvv)
                let mut rv_u = vec![Rat::zero(); dim * dim]; // coef·(b·Quu + d·Qvu)
                let mut rv_v = vec![Rat::zero(); dim * dim]; // coef·(b·Quv + d·Qvv)
                block_combine(&mut ru_u, &ca, &q.uu, &cc, &q.vu);
                block_combine(&mut ru_v, &ca, &q.uv, &cc, &q.vv);
                block_combine(&mut rv_u, &cb, &q.uu, &cd, &q.vu);
                block_combine(&mut rv_v, &cb, &q.uv, &cd, &q.vv);
                block_combine(&mut next.uu, a, &ru_u, c, &ru_v);
                block_combine(&mut next.uv, b, &ru_u, d, &ru_v);
                block_combine(&mut next.vu, a, &rv_u, c, &rv_v);
                block_combine(&mut next.vv, b, &rv_u, d, &rv_v);
            }
            if next != *q {
                all_equal = false;
            }
            *q = next;
        }
        self.fixed = all_equal;
    }

    /// Evaluate every component at exact rational slot coordinates, rounding
    /// each component once.
    pub fn values(&self, u: &[Rat], v: &[Rat]) -> Vec<f64> {
        self.comps
            .iter()
            .map(|q| {
                let mut acc = Rat::zero();
                quad(&mut acc, &q.uu, u, u, self.dim);
                quad(&mut acc, &q.uv, u, v, self.dim);
                quad(&mut acc, &q.vu, v, u, self.dim);
                quad(&mut acc, &q.vv, v, v, self.dim);
                crate::domain::rational_to_f64(&acc)
            })
            .collect()
    }
}

fn quad(acc: &mut Rat, block: &[Rat], left: &[Rat], right: &[Rat], dim: usize) {
    for i in 0..dim {
        for j in 0..dim {
            let b = &block[i * dim + j];
            if !b.is_zero() {
                *acc += b * &left[i] * &right[j];
            }
        }
    }
}

/// Exact rational coordinates of a slot vector.
pub(crate) fn rational_coords(coords: &[f64]) -> Vec<Rat> {
    coords.iter().map(|&c| rat(c)).collect()
}

/// Factorized transport of a power-sum bound through diagonal maps:
/// `bound(a·u, d·v) = Σⱼ [coefⱼ·|u|^e1ⱼ·|v|^e2ⱼ] · [|a|^e1ⱼ·|d|^e2ⱼ]`.
pub(crate) struct FactorizedBound {
    exps: Vec<(f64, f64)>,
    coefs: Vec<f64>,
}

impl FactorizedBound {
    pub fn new(bound: &BoundSpec) -> Self {
        FactorizedBound {
            exps: bound
                .terms()
                .iter()
                .map(|t| (t.exp_first, t.exp_second))
                .collect(),
            coefs: bound.terms().iter().map(|t| t.coef).collect(),
        }
    }

    /// Per-term factors carried by the point: `coefⱼ·|u|^e1ⱼ·|v|^e2ⱼ`.
    pub fn point_factors(&self, norm_first: f64, norm_second: f64) -> Vec<f64> {
        self.exps
            .iter()
            .zip(&self.coefs)
            .map(|(&(e1, e2), &c)| c * pow0(norm_first, e1) * pow0(norm_second, e2))
            .collect()
    }

    /// Per-term factors carried by a diagonal map: `|a|^e1ⱼ·|d|^e2ⱼ`.
    pub fn map_factors(&self, map: &ArgMap) -> Vec<f64> {
        let (a, _, _, d) = map.entries_f64();
        self.exps
            .iter()
            .map(|&(e1, e2)| pow0(a.abs(), e1) * pow0(d.abs(), e2))
            .collect()
    }

    pub fn combine(point_factors: &[f64], map_factors: &[f64]) -> f64 {
        point_factors
            .iter()
            .zip(map_factors)
            .map(|(p, m)| p * m)
            .sum()
    }
}
