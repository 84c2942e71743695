//! Function models: a bilinear core plus a deterministic bounded perturbation.
//!
//! A model represents `f(u, v) = core(u, v) + g(u, v)` where each output
//! component of the core is a bilinear form `u^T B v` and `g` is an
//! envelope-bounded oscillation that is reproducible from a seed. The split
//! representation is what lets the extraction engine transport the core
//! exactly and keep the perturbation's contribution numerically tame.

use super::bound::BoundSpec;
use super::element::{canonical, PairPoint};
use crate::error::DomainError;

/// A dense `dim x dim` matrix (row-major) defining one output component of a
/// bilinear core: `component(u, v) = u^T B v = sum_{i,j} B[i][j] u_i v_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl CoreMatrix {
    /// Validate and build from row-major entries (`entries.len() == dim * dim`,
    /// all finite).
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self, DomainError> {
        if entries.len() != dim * dim {
            return Err(DomainError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        for (k, &e) in entries.iter().enumerate() {
            if !e.is_finite() {
                return Err(DomainError::BadCoreMatrix(k / dim, k % dim));
            }
        }
        Ok(Self { dim, entries })
    }

    /// The zero matrix.
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    /// Scalar multiplication matrix `[[s]]` for one-dimensional slots.
    pub fn scalar(s: f64) -> Result<Self, DomainError> {
        Self::new(1, vec![s])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Evaluate the bilinear form `u^T B v`.
    pub fn form(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let mut row = 0.0;
            for j in 0..self.dim {
                row += self.entries[i * self.dim + j] * v[j];
            }
            acc += u[i] * row;
        }
        acc
    }
}

/// Deterministic perturbation: `g_k(u, v) = amplitude * envelope(u, v) *
/// osc_k(u, v) / sqrt(m)` where `osc_k` is a seeded hash-driven oscillation
/// in `[-1, 1)` and `m` is the number of output components. The `1/sqrt(m)`
/// factor keeps the Euclidean norm of `g` within `amplitude * envelope`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub envelope: BoundSpec,
    pub seed: u64,
    pub amplitude: f64,
}

impl PerturbationSpec {
    pub fn new(envelope: BoundSpec, seed: u64, amplitude: f64) -> Result<Self, DomainError> {
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(DomainError::InvalidAmplitude(amplitude));
        }
        Ok(Self {
            envelope,
            seed,
            amplitude,
        })
    }

    /// Evaluate the perturbation's `out_dim` components at a point. Exactly
    /// zero wherever the envelope vanishes.
    pub fn evaluate(&self, point: &PairPoint, out_dim: usize) -> Vec<f64> {
        self.evaluate_with_env(
            self.envelope.value(point),
            point.first().coords(),
            point.second().coords(),
            out_dim,
        )
    }

    /// Evaluation core with the envelope value supplied by the caller (the
    /// iteration engine transports envelopes through composed maps in
    /// factorized form instead of re-evaluating power sums per point).
    pub(crate) fn evaluate_with_env(
        &self,
        env: f64,
        first: &[f64],
        second: &[f64],
        out_dim: usize,
    ) -> Vec<f64> {
        let mut out = vec![0.0; out_dim];
        self.accumulate_with_env(env, first, second, 1.0, &mut out);
        out
    }

    /// Add `weight · g(first, second)` onto `out` without allocating, with
    /// the envelope value supplied by the caller. Weight 1 reproduces
    /// [`Self::evaluate`] bit for bit.
    pub(crate) fn accumulate_with_env(
        &self,
        env: f64,
        first: &[f64],
        second: &[f64],
        weight: f64,
        out: &mut [f64],
    ) {
        if env == 0.0 || self.amplitude == 0.0 || weight == 0.0 {
            return;
        }
        let scale = weight * (self.amplitude * env / (out.len() as f64).sqrt());
        for (k, o) in out.iter_mut().enumerate() {
            *o += scale * oscillate_coords(self.seed, k as u64, first, second);
        }
    }
}

/// `f(u, v) = core(u, v) + perturbation(u, v)`: one core matrix per output
/// component, plus an optional perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionModel {
    cores: Vec<CoreMatrix>,
    perturbation: Option<PerturbationSpec>,
}

impl FunctionModel {
    /// Validate and build. At least one output component; all core matrices
    /// must share the same slot dimension.
    pub fn new(
        cores: Vec<CoreMatrix>,
        perturbation: Option<PerturbationSpec>,
    ) -> Result<Self, DomainError> {
        if cores.is_empty() {
            return Err(DomainError::EmptyModel);
        }
        let dim = cores[0].dim();
        for c in &cores[1..] {
            if c.dim() != dim {
                return Err(DomainError::DimensionMismatch {
                    expected: dim,
                    found: c.dim(),
                });
            }
        }
        Ok(Self {
            cores,
            perturbation,
        })
    }

    /// A purely bilinear model (no perturbation).
    pub fn bilinear(cores: Vec<CoreMatrix>) -> Result<Self, DomainError> {
        Self::new(cores, None)
    }

    /// Scalar bilinear model `f(x, y) = s * x * y` on one-dimensional slots.
    pub fn scalar_bilinear(s: f64) -> Result<Self, DomainError> {
        Self::bilinear(vec![CoreMatrix::scalar(s)?])
    }

    pub fn cores(&self) -> &[CoreMatrix] {
        &self.cores
    }

    pub fn perturbation(&self) -> Option<&PerturbationSpec> {
        self.perturbation.as_ref()
    }

    /// Slot dimension (input vectors have this many coordinates).
    pub fn slot_dim(&self) -> usize {
        self.cores[0].dim()
    }

    /// Number of output components.
    pub fn out_dim(&self) -> usize {
        self.cores.len()
    }

    /// Evaluate the bilinear core only.
    pub fn core_value(&self, point: &PairPoint) -> Vec<f64> {
        let u = point.first().coords();
        let v = point.second().coords();
        self.cores.iter().map(|b| b.form(u, v)).collect()
    }

    /// Evaluate the perturbation only (zero vector if there is none).
    pub fn perturbation_value(&self, point: &PairPoint) -> Vec<f64> {
        match &self.perturbation {
            Some(p) => p.evaluate(point, self.out_dim()),
            None => vec![0.0; self.out_dim()],
        }
    }
}

/// Evaluate a model at a point: core plus perturbation, componentwise.
pub fn evaluate_model(model: &FunctionModel, point: &PairPoint) -> Vec<f64> {
    let mut value = model.core_value(point);
    if let Some(p) = &model.perturbation {
        let g = p.evaluate(point, model.out_dim());
        for (vk, gk) in value.iter_mut().zip(g) {
            *vk += gk;
        }
    }
    value
}

/// SplitMix64 step: a well-distributed 64-bit mix used to derive the
/// oscillation from seed and coordinates.
#[inline]
pub(crate) fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic oscillation in `[-1, 1)` for output component `k` at the
/// point whose slot coordinates are `first` and `second`: hashes the seed,
/// the component index, and the bit patterns of every coordinate. Bitwise
/// reproducible across runs and platforms.
pub(crate) fn oscillate_coords(seed: u64, k: u64, first: &[f64], second: &[f64]) -> f64 {
    let mut h = splitmix64(seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    for &c in first {
        h = splitmix64(h ^ canonical(c).to_bits());
    }
    for &c in second {
        h = splitmix64(h ^ canonical(c).to_bits());
    }
    ((h >> 11) as f64) / (1u64 << 53) as f64 * 2.0 - 1.0
}
