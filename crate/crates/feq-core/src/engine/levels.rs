//! Level expansion of operator powers.
//!
//! Applying the operator `n` times turns one evaluation point into a weighted
//! family of points reached through all length-`n` compositions of the
//! argument maps. This module maintains that family level by level, merging
//! paths that compose to the same exact rational map. For diagonal
//! (commuting) maps the merged family at level `n` has at most
//! `C(n+m-1, m-1)` entries instead of `m^n` paths; weights are accumulated in
//! exact rational arithmetic and rounded once on snapshot, so entries are
//! deterministic and independent of merge order.

use std::collections::HashMap;

use num::rational::BigRational;
use num::{Signed, Zero};

use crate::domain::{rational_to_f64, ArgMap, OperatorSpec};

use super::error::EngineError;

/// Hard guard on the merged-entry count of a single level; non-diagonal maps
/// can grow the expansion exponentially and this bounds memory before the
/// depth cap is reached.
pub(crate) const MAX_LEVEL_ENTRIES: usize = 2_000_000;

/// One merged entry of a level-`n` expansion: the exact composed map, the
/// signed sum of path coefficient products that reach it, and the sum of the
/// absolute coefficient products (the majorant transport weight).
#[derive(Debug, Clone)]
pub struct LevelEntry {
    pub map: ArgMap,
    pub weight: f64,
    pub abs_weight: f64,
}

/// Iterator-style expander: starts at level 0 (identity map, weight 1) and
/// steps one operator application at a time, keeping exact rational weights
/// between levels.
pub(crate) struct LevelExpansion {
    terms: Vec<(BigRational, BigRational, ArgMap)>, // (coef, |coef|, map)
    diagonal: bool,
    level: u32,
    frontier: Vec<(ArgMap, BigRational, BigRational)>, // sorted by map
}

impl LevelExpansion {
    pub fn new(spec: &OperatorSpec) -> Self {
        let terms = spec
            .terms()
            .iter()
            .map(|t| {
                let c = BigRational::from_float(t.coef)
                    .expect("operator coefficients are validated finite");
                (c.clone(), c.abs(), t.map.clone())
            })
            .collect();
        let one = BigRational::from_integer(1.into());
        Self {
            terms,
            diagonal: spec.all_diagonal(),
            level: 0,
            frontier: vec![(ArgMap::identity(), one.clone(), one)],
        }
    }

    pub fn diagonal(&self) -> bool {
        self.diagonal
    }

    /// Snapshot of the current level with weights rounded to `f64` (one
    /// rounding from the exact accumulated values), in canonical map order.
    pub fn entries(&self) -> Vec<LevelEntry> {
        self.frontier
            .iter()
            .map(|(map, w, aw)| LevelEntry {
                map: map.clone(),
                weight: rational_to_f64(w),
                abs_weight: rational_to_f64(aw),
            })
            .collect()
    }

    /// Advance one level: every entry spawns one child per operator term,
    /// composing the term's map outside the entry's map; children with equal
    /// composed maps merge exactly.
    pub fn step(&mut self) -> Result<(), EngineError> {
        let mut merged: HashMap<ArgMap, (BigRational, BigRational)> =
            HashMap::with_capacity(self.frontier.len() * self.terms.len());
        for (map, w, aw) in &self.frontier {
            for (coef, abs_coef, term_map) in &self.terms {
                let child = term_map.compose(map);
                let slot = merged
                    .entry(child)
                    .or_insert_with(|| (BigRational::zero(), BigRational::zero()));
                slot.0 += coef * w;
                slot.1 += abs_coef * aw;
            }
        }
        if merged.len() > MAX_LEVEL_ENTRIES {
            return Err(EngineError::DepthCapExceeded {
                requested: self.level + 1,
                cap: self.level,
            });
        }
        let mut next: Vec<(ArgMap, BigRational, BigRational)> = merged
            .into_iter()
            .map(|(map, (w, aw))| (map, w, aw))
            .collect();
        next.sort_by(|x, y| x.0.cmp(&y.0));
        self.frontier = next;
        self.level += 1;
        Ok(())
    }
}

/// Merged expansion of level `n` for a spec, enforcing the depth cap for
/// non-diagonal maps (diagonal families stay polynomial and are exempt).
pub(crate) fn level_entries(
    spec: &OperatorSpec,
    n: u32,
    depth_cap: u32,
) -> Result<Vec<LevelEntry>, EngineError> {
    if !spec.all_diagonal() && n > depth_cap {
        return Err(EngineError::DepthCapExceeded {
            requested: n,
            cap: depth_cap,
        });
    }
    let mut exp = LevelExpansion::new(spec);
    for _ in 0..n {
        exp.step()?;
    }
    Ok(exp.entries())
}
