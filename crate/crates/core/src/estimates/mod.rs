//! Exponent arithmetic, the smallness threshold, the invariant ball, discrete
//! Sobolev constants, the level-set decay fit, and checks of the a-priori bounds.

mod ball;
mod bounds;
mod exponents;
mod level_sets;
mod sobolev;

use thiserror::Error;

use crate::discretization::DiscretizationError;

pub use ball::{ball_from_data, invariant_ball, majorant_recursion, BallParams, MajorantTrace};
pub use bounds::{verify_bounds, EstimateReport, EstimateRow, BOUND_TOLERANCE};
pub use exponents::{exponents, holder_conjugate, smallness_threshold, sobolev_conjugate, ExponentRecord};
pub use level_sets::{fit_linf_bound, level_set_samples, LevelSample, LinfFit, LinfVerdict};
pub use sobolev::{
    estimate_sobolev_constant, estimate_sobolev_constant_with, is_admissible, sobolev_ratio, SobolevEstimate,
    SobolevOptions,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("exponent {name} is undefined: {reason}")]
    Missing { name: &'static str, reason: String },
    #[error("inconsistent exponents: {0}")]
    Inconsistent(String),
    #[error("need at least 5 levels with positive excess and measure, got {0}")]
    InsufficientSamples(usize),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
}
