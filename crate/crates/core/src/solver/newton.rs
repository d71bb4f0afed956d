use std::time::{Duration, Instant};

use super::{check_initial, ProblemSpec, SolverError};
use crate::discretization::{residual_norm, ConvectionTerm, Field, WeakForm};
use crate::linalg::{gmres, KrylovOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub krylov: KrylovOptions,
    /// Step halvings tried by the line search before giving up.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            krylov: KrylovOptions::default(),
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    /// Residual norm before the first step and after every accepted step.
    pub residual_trace: Vec<f64>,
    /// Accepted step length per iteration (the first entry, for the initial
    /// guess, is 0).
    pub step_lengths: Vec<f64>,
    pub field: Field,
    pub wall_time: Duration,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_trace.last().expect("trace holds the initial residual")
    }
}

pub fn solve_newton(problem: &ProblemSpec, u0: &Field, tol: f64, max_iter: usize) -> Result<SolveReport, SolverError> {
    solve_newton_with(
        problem,
        u0,
        &NewtonOptions {
            tol,
            max_iter,
            ..NewtonOptions::default()
        },
    )
}

pub fn solve_newton_with(problem: &ProblemSpec, u0: &Field, opts: &NewtonOptions) -> Result<SolveReport, SolverError> {
    let form = WeakForm {
        op: &problem.op,
        convection: ConvectionTerm::Coupled(&problem.h),
        e: &problem.e,
        f: &problem.f,
        mu: problem.mu,
    };
    newton(problem, &form, u0, opts)
}

/// Damped Newton on `form`. The raw step is first capped so that its largest
/// entry is at most `max(1, ‖u‖∞)`, then halved until the residual norm drops.
pub(crate) fn newton(
    problem: &ProblemSpec,
    form: &WeakForm,
    u0: &Field,
    opts: &NewtonOptions,
) -> Result<SolveReport, SolverError> {
    problem.validate()?;
    if !(opts.tol > 0.0) {
        return Err(SolverError::Precondition(format!("tolerance must be positive, got {}", opts.tol)));
    }
    check_initial(problem, u0)?;
    let start = Instant::now();
    let mesh = problem.mesh;
    let mut u = u0.clone();
    let mut r = form.residual(&u)?;
    let mut rn = residual_norm(&mesh, &r);
    let mut residual_trace = vec![rn];
    let mut step_lengths = vec![0.0];
    let mut iterations = 0;
    let mut stalled = false;

    while rn > opts.tol && iterations < opts.max_iter {
        let jac = form.jacobian(&u)?;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let d = gmres(&jac, &rhs, &opts.krylov)?.x;
        let dmax = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let umax = u.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut lambda = if dmax > umax.max(1.0) { umax.max(1.0) / dmax } else { 1.0 };
        let base = u.interior_values();
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial_int: Vec<f64> = base.iter().zip(&d).map(|(a, b)| a + lambda * b).collect();
            let mut trial = u.clone();
            trial.set_interior(&trial_int);
            if trial.is_finite() {
                let tr = form.residual(&trial)?;
                let tn = residual_norm(&mesh, &tr);
                if tn < rn {
                    accepted = Some((trial, tr, tn));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((trial, tr, tn)) = accepted else {
            stalled = true;
            break;
        };
        u = trial;
        r = tr;
        rn = tn;
        iterations += 1;
        residual_trace.push(rn);
        step_lengths.push(lambda);
    }

    Ok(SolveReport {
        converged: !stalled && rn <= opts.tol,
        iterations,
        residual_trace,
        step_lengths,
        field: u,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convection_profile::HSpec;
    use crate::discretization::{build_mesh, integrate_cells, norm, DiscretizationError, NormKind, OperatorSpec, VectorField};

    fn poisson(n: usize) -> ProblemSpec {
        let mesh = build_mesh(1, n).unwrap();
        ProblemSpec::new(
            OperatorSpec::p_laplacian(2.0, 0.0).unwrap(),
            HSpec::Zero,
            VectorField::zeros(mesh),
            Field::constant(mesh, 2.0),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn poisson_in_one_step() {
        let problem = poisson(64);
        let rep = solve_newton(&problem, &Field::zeros(problem.mesh), 1e-8, 20).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        let err = rep.field.sub(&Field::from_fn(problem.mesh, |x| x[0] * (1.0 - x[0]))).unwrap();
        assert!(norm(&err, NormKind::Lq(2.0)) <= 1e-3);
    }

    #[test]
    fn zero_data_takes_no_steps() {
        let mesh = build_mesh(2, 6).unwrap();
        let problem = ProblemSpec::new(
            OperatorSpec::p_laplacian(3.0, 0.0).unwrap(),
            HSpec::Log,
            VectorField::zeros(mesh),
            Field::zeros(mesh),
            0.0,
        )
        .unwrap();
        let rep = solve_newton(&problem, &Field::zeros(mesh), 1e-10, 10).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert!(rep.field.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn p4_first_integral() {
        let mesh = build_mesh(1, 128).unwrap();
        let problem = ProblemSpec::new(
            OperatorSpec::p_laplacian_default(4.0, &mesh).unwrap(),
            HSpec::Zero,
            VectorField::zeros(mesh),
            Field::constant(mesh, 1.0),
            0.0,
        )
        .unwrap();
        let rep = solve_newton(&problem, &Field::zeros(mesh), 1e-10, 200).unwrap();
        assert!(rep.converged, "{:?}", rep.residual_trace.last());
        assert!(rep.residual_trace.windows(2).all(|w| w[1] <= w[0]));
        let exact = Field::from_fn(mesh, |x| 0.75 * (0.5f64.powf(4.0 / 3.0) - (x[0] - 0.5).abs().powf(4.0 / 3.0)));
        let err = norm(&rep.field.sub(&exact).unwrap(), NormKind::Lq(2.0));
        assert!(err < 2e-3, "{err}");
    }

    #[test]
    fn energy_identity_at_solution() {
        let mesh = build_mesh(1, 32).unwrap();
        let problem = ProblemSpec::new(
            OperatorSpec::p_laplacian_default(3.0, &mesh).unwrap(),
            HSpec::Power { theta: 1.0 },
            VectorField::constant(mesh, &[1.0]).unwrap(),
            Field::constant(mesh, 1.0),
            0.0,
        )
        .unwrap();
        let tol = 1e-10;
        let rep = solve_newton(&problem, &Field::zeros(mesh), tol, 100).unwrap();
        assert!(rep.converged);
        let u = &rep.field;
        let dup = norm(u, NormKind::W1pSeminorm(3.0));
        let lhs = problem.op.alpha * dup.powi(3);
        let rhs = integrate_cells(u, |c, um| {
            problem.h.eval(um).abs() * u.cell_gradient(c)[0].abs() + problem.f.cell_average(c).abs() * um.abs()
        }) + tol * norm(u, NormKind::Lq(3.0));
        assert!(lhs <= rhs, "{lhs} > {rhs}");
    }

    #[test]
    fn unregularized_p4_from_zero_is_singular() {
        let mesh = build_mesh(1, 8).unwrap();
        let problem = ProblemSpec::new(
            OperatorSpec::p_laplacian(4.0, 0.0).unwrap(),
            HSpec::Zero,
            VectorField::zeros(mesh),
            Field::constant(mesh, 1.0),
            0.0,
        )
        .unwrap();
        assert!(matches!(
            solve_newton(&problem, &Field::zeros(mesh), 1e-10, 10),
            Err(SolverError::Discretization(DiscretizationError::SingularJacobian { .. }))
        ));
    }

    #[test]
    fn iteration_cap_gives_unconverged_report() {
        let mesh = build_mesh(1, 32).unwrap();
        let problem = ProblemSpec::new(
            OperatorSpec::p_laplacian_default(4.0, &mesh).unwrap(),
            HSpec::Zero,
            VectorField::zeros(mesh),
            Field::constant(mesh, 1.0),
            0.0,
        )
        .unwrap();
        let rep = solve_newton(&problem, &Field::zeros(mesh), 1e-12, 2).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 2);
        assert_eq!(rep.residual_trace.len(), 3);
    }

    #[test]
    fn rejects_bad_initial_guess() {
        let problem = poisson(8);
        let bad = Field::constant(problem.mesh, 1.0);
        assert!(matches!(solve_newton(&problem, &bad, 1e-8, 5), Err(SolverError::Precondition(_))));
        assert!(solve_newton(&problem, &Field::zeros(problem.mesh), 0.0, 5).is_err());
    }
}
