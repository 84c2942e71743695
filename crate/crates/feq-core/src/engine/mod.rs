//! Iteration engine: operator application, envelope transport, limit
//! extraction with certified stopping, stability verification, and
//! contraction-rate measurement.

mod error;
mod lambda;
mod levels;
mod limit;
mod operator;
mod rate;
mod transport;
mod verify;

pub use error::EngineError;
pub use lambda::{
    apply_lambda, apply_lambda_bound, eigenfactor, lambda_power_bound, mu_star,
};
pub use levels::LevelEntry;
pub use limit::{
    defect, limit_value, IterationLimits, IterationTrace, LimitEvaluator, StopReason,
    DEFAULT_DEPTH_CAP, DEFAULT_MAX_ITER,
};
pub use operator::{apply_operator, operator_power, operator_power_naive};
pub use rate::{measured_rate, RateEstimate, RateOptions};
pub use verify::{
    uniqueness_probe, verify_stability, StabilityCheck, UniquenessCheck, Verdict,
};

