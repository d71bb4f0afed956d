//! Measured checks of the a-priori inequalities at a computed solution.

use super::{ball_from_data, ExponentRecord};
use crate::convection_profile::HSpec;
use crate::discretization::{integrate_cells, norm, DiscretizationError, Field, NormKind};
use crate::solver::ProblemSpec;

/// Relative slack allowed on integral inequalities for quadrature error.
pub const BOUND_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`
    pub slack: f64,
    /// `lhs ≤ rhs·(1 + BOUND_TOLERANCE)`
    pub pass: bool,
}

impl EstimateRow {
    pub fn new(id: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            id: id.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            pass: lhs <= rhs * (1.0 + BOUND_TOLERANCE),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EstimateReport {
    pub rows: Vec<EstimateRow>,
    /// Rows that could not be evaluated, with the reason.
    pub skipped: Vec<(String, String)>,
}

impl EstimateReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, id: &str) -> Option<&EstimateRow> {
        self.rows.iter().find(|r| r.id == id)
    }
}

/// Evaluates at `u`:
///
/// * `energy`: `α‖Du‖_p^p + μ∫u² ≤ ∫|h(u)||E||Du| + ∫|f||u|` (testing with `u` itself);
/// * `mass-l1`, when `μ > 0`: `μ‖u‖₁ ≤ ‖f‖₁`;
/// * `majorant`, for the power family with `s, m, r, θ, p*` known and a Sobolev
///   constant given: `‖u‖_s ≤ a + b‖u‖_s^{1+θ}`.
pub fn verify_bounds(
    problem: &ProblemSpec,
    u: &Field,
    rec: Option<&ExponentRecord>,
    sobolev: Option<f64>,
) -> Result<EstimateReport, DiscretizationError> {
    if u.mesh() != &problem.mesh {
        return Err(DiscretizationError::MeshMismatch);
    }
    let dim = problem.mesh.dim();
    let p = problem.p();
    let mut report = EstimateReport::default();

    let grad_mag = |c: usize| u.cell_gradient(c)[..dim].iter().map(|g| g * g).sum::<f64>().sqrt();
    let lhs = problem.op.alpha * norm(u, NormKind::W1pSeminorm(p)).powf(p) + problem.mu * integrate_cells(u, |_, v| v * v);
    let rhs = integrate_cells(u, |c, v| {
        let e = problem.e.cell_average(c);
        let e_mag = e[..dim].iter().map(|x| x * x).sum::<f64>().sqrt();
        problem.h.eval(v).abs() * e_mag * grad_mag(c) + problem.f.cell_average(c).abs() * v.abs()
    });
    report.rows.push(EstimateRow::new("energy", lhs, rhs));

    if problem.mu > 0.0 {
        report.rows.push(EstimateRow::new(
            "mass-l1",
            problem.mu * norm(u, NormKind::Lq(1.0)),
            norm(&problem.f, NormKind::Lq(1.0)),
        ));
    } else {
        report.skipped.push(("mass-l1".into(), "mu = 0".into()));
    }

    match majorant_row(problem, u, rec, sobolev) {
        Ok(row) => report.rows.push(row),
        Err(reason) => report.skipped.push(("majorant".into(), reason)),
    }
    Ok(report)
}

fn majorant_row(
    problem: &ProblemSpec,
    u: &Field,
    rec: Option<&ExponentRecord>,
    sobolev: Option<f64>,
) -> Result<EstimateRow, String> {
    let HSpec::Power { theta } = problem.h else {
        return Err(format!("h is {}, not the power family", problem.h.family_name()));
    };
    let rec = rec.ok_or("no exponent record")?;
    let sobolev = sobolev.ok_or("no Sobolev constant")?;
    let s = rec.require("s").map_err(|e| e.to_string())?;
    let m = rec.require("m").map_err(|e| e.to_string())?;
    let r = rec.require("r").map_err(|e| e.to_string())?;
    let f_m = norm(&problem.f, NormKind::Lq(m));
    let e_r = norm(&problem.e.magnitude(), NormKind::Lq(r));
    if e_r == 0.0 {
        return Err("E = 0".into());
    }
    let ball = ball_from_data(rec, problem.op.alpha, sobolev, f_m, e_r).map_err(|e| e.to_string())?;
    let us = norm(u, NormKind::Lq(s));
    Ok(EstimateRow::new("majorant", us, ball.a + ball.b * us.powf(1.0 + theta)))
}
