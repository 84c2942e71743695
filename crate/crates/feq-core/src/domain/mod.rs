//! Core domain types: points in the product space, exact-rational argument
//! maps, linear operators built from them, majorant bounds, and function
//! models (bilinear core + seeded perturbation).

mod bound;
mod element;
mod map;
mod model;
mod operator;

pub use bound::{BoundSpec, BoundTerm};
pub use element::{PairPoint, VectorElement};
pub use map::{compose_maps, ArgMap};
pub use model::{evaluate_model, CoreMatrix, FunctionModel, PerturbationSpec};
pub use operator::{OperatorSpec, OperatorTerm};

pub(crate) use bound::pow0;
pub(crate) use element::{l2, l2_diff};
pub(crate) use map::rational_to_f64;
