use super::{solve_newton, ProblemSpec, SolveReport, SolverError};
use crate::convection_profile::HSpec;
use crate::discretization::{norm, Field, NormKind};
use crate::estimates::BOUND_TOLERANCE;

#[derive(Debug, Clone, PartialEq)]
pub struct LowerOrderReport {
    pub solve: SolveReport,
    /// `r = N/(p − 1 − θN)`, the integrability needed of `E`.
    pub r: f64,
    /// `μ‖u‖₁`
    pub mu_l1: f64,
    /// `‖f‖₁`
    pub f_l1: f64,
    /// `μ‖u‖₁ ≤ ‖f‖₁` up to the quadrature tolerance.
    pub l1_bound_holds: bool,
}

/// Solves the problem with the mass term `μu` and `h(s) = s|s|^{p−2+θ}`,
/// `θ < (p−1)/N`, starting from `u = 0`.
pub fn solve_with_lower_order(problem: &ProblemSpec, tol: f64, max_iter: usize) -> Result<LowerOrderReport, SolverError> {
    let HSpec::PowerMu { p: hp, theta } = problem.h else {
        return Err(SolverError::Precondition(format!(
            "the mass-term variant needs the power-mu family, got {}",
            problem.h.family_name()
        )));
    };
    let p = problem.p();
    if hp != p {
        return Err(SolverError::Precondition(format!("h uses p = {hp} but the operator has p = {p}")));
    }
    let n = problem.mesh.dim() as f64;
    if !(theta > 0.0 && theta < (p - 1.0) / n) {
        return Err(SolverError::Precondition(format!(
            "theta = {theta} must lie in (0, (p-1)/N) = (0, {})",
            (p - 1.0) / n
        )));
    }
    let r = n / (p - 1.0 - theta * n);
    let solve = solve_newton(problem, &Field::zeros(problem.mesh), tol, max_iter)?;
    let mu_l1 = problem.mu * norm(&solve.field, NormKind::Lq(1.0));
    let f_l1 = norm(&problem.f, NormKind::Lq(1.0));
    Ok(LowerOrderReport {
        l1_bound_holds: mu_l1 <= f_l1 * (1.0 + BOUND_TOLERANCE),
        solve,
        r,
        mu_l1,
        f_l1,
    })
}
