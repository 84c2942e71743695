//! Direct-iteration stability analysis for two-variable functional
//! equations.
//!
//! Given a self-map `T f(q) = Σᵢ aᵢ · f(Mᵢ q)` built from linear argument
//! maps, and a pointwise envelope `μ` dominating the one-step defect
//! `‖f − T f‖`, the iterates `Tⁿ f` converge geometrically whenever the
//! envelope transport `Λ μ(q) = Σᵢ |aᵢ| · μ(Mᵢ q)` contracts. This crate
//! computes the limit `K = limₙ Tⁿ f` with certified stopping, bounds
//! `‖f − K‖` by the summed envelope series `μ* = Σₙ Λⁿ μ`, and verifies
//! every claim numerically: contraction factors against closed forms,
//! per-step deltas against transported envelopes, and limit functions
//! against the identities they are supposed to satisfy.
//!
//! Module map:
//! - [`domain`]: exact-rational argument maps, operator and bound specs,
//!   function models (bilinear cores plus seeded perturbations).
//! - [`engine`]: operator application, envelope transport, limit
//!   extraction with certified stopping, stability verification, and
//!   contraction-rate measurement.
//! - [`catalog`]: ready-made operator/bound families (`thm31`, `thm32`)
//!   with closed-form constants, plus residual checkers for the
//!   identities their limits satisfy.
//! - [`lab`]: perturbed-model manufacture, deterministic probe grids, and
//!   admissibility audits.
//! - [`dsl`]: the `.feq` text format — parser, validator, and canonical
//!   formatter.

pub mod catalog;
pub mod domain;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod lab;

pub use error::DomainError;
