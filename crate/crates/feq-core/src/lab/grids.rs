//! Deterministic probe grids.
//!
//! All grids are built from Halton low-discrepancy sequences so every run of
//! every binary sees the same points. Two families: zero-free interior grids
//! (for probes that divide by envelope values or need nonzero coordinates)
//! and verification grids that additionally cover the origin and the axes,
//! where envelopes vanish and the checked bounds degenerate.

use crate::catalog::QuadPoint;
use crate::domain::{PairPoint, VectorElement};

/// Radical-inverse (Halton) value of index `i` in the given base, in `(0,1)`
/// for `i ≥ 1`.
pub fn halton(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f *= inv;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `count` quasi-random pair points in `[-box_half, box_half]^{2·dim}` with
/// every coordinate nonzero. Slots draw from bases 2 and 3; indices start at
/// 2 so the base-2 midpoint (which would give a zero coordinate) never
/// appears; any residual zero coordinate is skipped.
pub fn pair_grid(count: usize, box_half: f64, dim: usize) -> Vec<PairPoint> {
    assert!(dim > 0, "pair_grid requires dim >= 1");
    let mut points = Vec::with_capacity(count);
    let mut i: u64 = 2;
    while points.len() < count {
        let mut first = Vec::with_capacity(dim);
        let mut second = Vec::with_capacity(dim);
        for k in 0..dim {
            let idx = i + k as u64;
            first.push(box_half * (2.0 * halton(idx, 2) - 1.0));
            second.push(box_half * (2.0 * halton(idx, 3) - 1.0));
        }
        i += dim as u64;
        if first.iter().chain(second.iter()).any(|&c| c == 0.0) {
            continue;
        }
        let point = PairPoint::new(
            VectorElement::new(first).expect("grid coordinates are finite"),
            VectorElement::new(second).expect("grid coordinates are finite"),
        )
        .expect("slots have equal dimension");
        points.push(point);
    }
    points
}

/// Default verification grid: the origin, then axis points at `±box_half`
/// in every coordinate direction of both slots, then a Halton interior
/// fill. Origin and axis coverage exercise the degenerate envelope cases;
/// truncated to `count` if `count` is small.
pub fn default_grid(count: usize, box_half: f64, dim: usize) -> Vec<PairPoint> {
    assert!(dim > 0, "default_grid requires dim >= 1");
    let mut points = Vec::with_capacity(count);
    points.push(PairPoint::origin(dim));
    for slot in 0..2 {
        for k in 0..dim {
            for sign in [1.0, -1.0] {
                let mut first = vec![0.0; dim];
                let mut second = vec![0.0; dim];
                let target = if slot == 0 { &mut first } else { &mut second };
                target[k] = sign * box_half;
                points.push(
                    PairPoint::new(
                        VectorElement::new(first).expect("grid coordinates are finite"),
                        VectorElement::new(second).expect("grid coordinates are finite"),
                    )
                    .expect("slots have equal dimension"),
                );
            }
        }
    }
    points.truncate(count);
    if points.len() < count {
        points.extend(pair_grid(count - points.len(), box_half, dim));
    }
    points
}

/// `count` quasi-random four-slot tuples in `[-box_half, box_half]^{4·dim}`
/// with every coordinate nonzero (bases 2, 3, 5, 7).
pub fn quad_grid(count: usize, box_half: f64, dim: usize) -> Vec<QuadPoint> {
    assert!(dim > 0, "quad_grid requires dim >= 1");
    const BASES: [u64; 4] = [2, 3, 5, 7];
    let mut quads = Vec::with_capacity(count);
    let mut i: u64 = 2;
    while quads.len() < count {
        let mut slots: [Vec<f64>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for (slot, base) in BASES.iter().enumerate() {
            for k in 0..dim {
                slots[slot].push(box_half * (2.0 * halton(i + k as u64, *base) - 1.0));
            }
        }
        i += dim as u64;
        if slots.iter().flatten().any(|&c| c == 0.0) {
            continue;
        }
        let [x, y, z, w] = slots;
        let make = |coords: Vec<f64>| VectorElement::new(coords).expect("finite grid coordinates");
        quads.push(
            QuadPoint::new(make(x), make(y), make(z), make(w)).expect("slots have equal dimension"),
        );
    }
    quads
}
