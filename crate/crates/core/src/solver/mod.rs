//! Nonlinear solves of the discrete weak problem: damped Newton, truncated
//! problems and their sweep, the frozen-coefficient fixed-point map, the
//! variant with a mass term, and the uniqueness experiment.

mod fixed_point;
mod lower_order;
mod newton;
mod sweep;
mod uniqueness;

use thiserror::Error;

use crate::convection_profile::HSpec;
use crate::discretization::{DiscretizationError, Field, Mesh, OperatorSpec, VectorField};
use crate::estimates::{EstimateError, ExponentRecord};
use crate::linalg::LinearSolveError;

pub use fixed_point::{fixed_point_iterate, frozen_step, frozen_step_with, FixedPointOptions, FixedPointReport, MajorantCheck};
pub use lower_order::{solve_with_lower_order, LowerOrderReport};
pub use newton::{solve_newton, solve_newton_with, NewtonOptions, SolveReport};
pub use sweep::{solve_truncated, truncation_sweep, SweepEntry, SweepReport, STABILIZATION_TOL};
pub use uniqueness::{random_dirichlet_seeds, uniqueness_experiment, UniquenessReport};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error("linear solve failed: {0}")]
    Linear(#[from] LinearSolveError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// One discrete instance of `-div a(x,u,Du) + μu = -div(h(u)E) + f` with zero
/// Dirichlet data.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub mesh: Mesh,
    pub op: OperatorSpec,
    pub h: HSpec,
    pub e: VectorField,
    pub f: Field,
    pub mu: f64,
    pub exponents: Option<ExponentRecord>,
}

impl ProblemSpec {
    pub fn new(op: OperatorSpec, h: HSpec, e: VectorField, f: Field, mu: f64) -> Result<Self, SolverError> {
        let problem = Self {
            mesh: *f.mesh(),
            op,
            h,
            e,
            f,
            mu,
            exponents: None,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_exponents(mut self, rec: ExponentRecord) -> Result<Self, SolverError> {
        if rec.n != self.mesh.dim() || rec.p != self.op.p() {
            return Err(SolverError::Precondition(format!(
                "exponent record (N = {}, p = {}) does not match the problem (N = {}, p = {})",
                rec.n,
                rec.p,
                self.mesh.dim(),
                self.op.p()
            )));
        }
        self.exponents = Some(rec);
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.op.p() >= 2.0) {
            return Err(DiscretizationError::Exponent(self.op.p()).into());
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(SolverError::Precondition(format!("mu must be finite and non-negative, got {}", self.mu)));
        }
        if self.e.mesh() != &self.mesh || self.f.mesh() != &self.mesh {
            return Err(DiscretizationError::MeshMismatch.into());
        }
        if self.e.components() != self.mesh.dim() {
            return Err(DiscretizationError::Components {
                expected: self.mesh.dim(),
                found: self.e.components(),
            }
            .into());
        }
        if !self.e.is_finite() {
            return Err(DiscretizationError::NonFinite("E").into());
        }
        if !self.f.is_finite() {
            return Err(DiscretizationError::NonFinite("f").into());
        }
        if let Some(b) = &self.op.growth_offset {
            if b.mesh() != &self.mesh {
                return Err(DiscretizationError::MeshMismatch.into());
            }
        }
        Ok(())
    }

    pub fn p(&self) -> f64 {
        self.op.p()
    }
}

fn check_initial(problem: &ProblemSpec, u0: &Field) -> Result<(), SolverError> {
    if u0.mesh() != &problem.mesh {
        return Err(DiscretizationError::MeshMismatch.into());
    }
    if !u0.satisfies_dirichlet() {
        return Err(SolverError::Precondition("initial field is nonzero on the boundary".into()));
    }
    Ok(())
}
