use super::newton::newton;
use super::{NewtonOptions, ProblemSpec, SolveReport, SolverError};
use crate::convection_profile::HSpec;
use crate::discretization::{norm, ConvectionTerm, Field, NormKind, WeakForm};
use crate::estimates::{ball_from_data, estimate_sobolev_constant, BallParams};

/// The map `v ↦ u` solving `-div a(x,u,Du) + μu = -div(v|v|^θ E) + f`, from `u = 0`.
pub fn frozen_step(problem: &ProblemSpec, v: &Field, tol: f64) -> Result<SolveReport, SolverError> {
    frozen_step_with(
        problem,
        v,
        &NewtonOptions {
            tol,
            ..NewtonOptions::default()
        },
    )
}

pub fn frozen_step_with(problem: &ProblemSpec, v: &Field, opts: &NewtonOptions) -> Result<SolveReport, SolverError> {
    if !matches!(problem.h, HSpec::Power { .. }) {
        return Err(SolverError::Precondition(format!(
            "the frozen map needs the power family, got {}",
            problem.h.family_name()
        )));
    }
    let form = WeakForm {
        op: &problem.op,
        convection: ConvectionTerm::Frozen { h: &problem.h, v },
        e: &problem.e,
        f: &problem.f,
        mu: problem.mu,
    };
    newton(problem, &form, &Field::zeros(problem.mesh), opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub max_iters: usize,
    /// Stop once `‖v_{k+1} − v_k‖_s` is at most this.
    pub tol: f64,
    pub newton: NewtonOptions,
    /// Sobolev constant for the ball; estimated on the mesh when absent.
    pub sobolev: Option<f64>,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            max_iters: 50,
            tol: 1e-8,
            newton: NewtonOptions {
                tol: 1e-12,
                ..NewtonOptions::default()
            },
            sobolev: None,
        }
    }
}

/// `‖T(v)‖_s` against `a + b‖v‖_s^{1+θ}` for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    /// `‖v_k‖_s`, starting with `v_0`.
    pub norms: Vec<f64>,
    /// `‖v_{k+1} − v_k‖_s`.
    pub differences: Vec<f64>,
    pub converged: bool,
    /// Index `k` of the iterate whose image moved by at most the tolerance.
    pub iterations: usize,
    pub ball: Option<BallParams>,
    pub sobolev: Option<f64>,
    /// Every recorded norm is at most the ball radius.
    pub inside_ball: Option<bool>,
    pub majorant_checks: Vec<MajorantCheck>,
    /// Set when an inner solve failed; the trace up to that point is kept.
    pub aborted: Option<String>,
    /// The last computed iterate.
    pub field: Field,
}

/// Iterates `v_{k+1} = T(v_k)` and tracks the `L^s` norms against the invariant ball.
pub fn fixed_point_iterate(
    problem: &ProblemSpec,
    v0: &Field,
    opts: &FixedPointOptions,
) -> Result<FixedPointReport, SolverError> {
    let HSpec::Power { theta } = problem.h else {
        return Err(SolverError::Precondition(format!(
            "the fixed-point map needs the power family, got {}",
            problem.h.family_name()
        )));
    };
    let rec = problem
        .exponents
        .as_ref()
        .ok_or_else(|| SolverError::Precondition("the fixed-point iteration needs an exponent record".into()))?;
    let s = rec.require("s")?;
    if let Some(t) = rec.theta {
        if (t - theta).abs() > 1e-12 * theta.max(1.0) {
            return Err(SolverError::Precondition(format!(
                "exponent record has theta = {t} but h uses theta = {theta}"
            )));
        }
    }
    if v0.mesh() != &problem.mesh {
        return Err(crate::discretization::DiscretizationError::MeshMismatch.into());
    }

    let ball_inputs = match (rec.m, rec.r, rec.p_star, problem.e.values().iter().any(|&x| x != 0.0)) {
        (Some(m), Some(r), Some(p_star), true) => Some((m, r, p_star)),
        _ => None,
    };
    let (ball, sobolev) = match ball_inputs {
        Some((m, r, p_star)) => {
            let sob = match opts.sobolev {
                Some(v) => v,
                None => estimate_sobolev_constant(&problem.mesh, problem.p(), p_star)?,
            };
            let f_m = norm(&problem.f, NormKind::Lq(m));
            let e_r = norm(&problem.e.magnitude(), NormKind::Lq(r));
            (Some(ball_from_data(rec, problem.op.alpha, sob, f_m, e_r)?), Some(sob))
        }
        None => (None, opts.sobolev),
    };

    let norm_s = |u: &Field| norm(u, NormKind::Lq(s));
    let mut v = v0.clone();
    let mut norms = vec![norm_s(&v)];
    let mut differences = Vec::new();
    let mut majorant_checks = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut aborted = None;
    for k in 0..opts.max_iters {
        let step = match frozen_step_with(problem, &v, &opts.newton) {
            Ok(rep) if rep.converged => rep,
            Ok(rep) => {
                aborted = Some(format!(
                    "inner solve {k} stopped at residual {:e} after {} iterations",
                    rep.final_residual(),
                    rep.iterations
                ));
                break;
            }
            Err(e) => {
                aborted = Some(format!("inner solve {k} failed: {e}"));
                break;
            }
        };
        let u = step.field;
        let diff = norm_s(&u.sub(&v)?);
        let nu = norm_s(&u);
        if let Some(b) = &ball {
            let rhs = b.a + b.b * norms[norms.len() - 1].powf(1.0 + theta);
            majorant_checks.push(MajorantCheck { lhs: nu, rhs, slack: rhs - nu });
        }
        norms.push(nu);
        differences.push(diff);
        v = u;
        if diff <= opts.tol {
            converged = true;
            iterations = k;
            break;
        }
        iterations = k + 1;
    }
    let inside_ball = ball.map(|b| norms.iter().all(|&x| x <= b.radius));
    Ok(FixedPointReport {
        norms,
        differences,
        converged,
        iterations,
        ball,
        sobolev,
        inside_ball,
        majorant_checks,
        aborted,
        field: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_mesh, OperatorSpec, VectorField};
    use crate::estimates::exponents;

    fn problem(e: f64, f: f64) -> ProblemSpec {
        let mesh = build_mesh(3, 4).unwrap();
        ProblemSpec::new(
            OperatorSpec::p_laplacian(2.0, 0.0).unwrap(),
            HSpec::Power { theta: 1.0 },
            VectorField::constant(mesh, &[e, e, e]).unwrap(),
            Field::constant(mesh, f),
            0.0,
        )
        .unwrap()
        .with_exponents(exponents(2.0, 3, Some(1.2), Some(6.0), None).unwrap())
        .unwrap()
    }

    fn opts() -> FixedPointOptions {
        FixedPointOptions {
            sobolev: Some(0.4),
            ..FixedPointOptions::default()
        }
    }

    #[test]
    fn zero_drift_is_a_constant_map() {
        let p = problem(0.0, 3.0);
        let v = Field::from_fn(p.mesh, |x| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]) * x[2] * (1.0 - x[2]));
        let a = frozen_step(&p, &v, 1e-12).unwrap();
        let b = frozen_step(&p, &Field::zeros(p.mesh), 1e-12).unwrap();
        assert_eq!(a.field, b.field);
        let rep = fixed_point_iterate(&p, &Field::zeros(p.mesh), &opts()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.differences[1], 0.0);
        assert!(rep.ball.is_none());
    }

    #[test]
    fn zero_source_from_zero_is_fixed() {
        let p = problem(1.0, 0.0);
        let rep = fixed_point_iterate(&p, &Field::zeros(p.mesh), &opts()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.norms, vec![0.0, 0.0]);
        assert_eq!(rep.inside_ball, Some(true));
    }

    #[test]
    fn small_data_contracts_inside_ball() {
        let p = problem(0.5, 0.5);
        let rep = fixed_point_iterate(&p, &Field::zeros(p.mesh), &opts()).unwrap();
        assert!(rep.converged);
        assert!(rep.ball.unwrap().invariant);
        assert_eq!(rep.inside_ball, Some(true));
        assert!(rep.differences.windows(2).all(|w| w[1] <= w[0]));
        assert!(rep.majorant_checks.iter().all(|c| c.slack >= 0.0));
    }

    #[test]
    fn rejects_other_families_and_missing_exponents() {
        let mut p = problem(1.0, 1.0);
        p.h = HSpec::Log;
        assert!(frozen_step(&p, &Field::zeros(p.mesh), 1e-10).is_err());
        let mesh = build_mesh(3, 3).unwrap();
        let q = ProblemSpec::new(
            OperatorSpec::p_laplacian(2.0, 0.0).unwrap(),
            HSpec::Power { theta: 1.0 },
            VectorField::zeros(mesh),
            Field::zeros(mesh),
            0.0,
        )
        .unwrap();
        assert!(fixed_point_iterate(&q, &Field::zeros(mesh), &opts()).is_err());
    }

    #[test]
    fn recovers_manufactured_solution_in_one_dimension() {
        use crate::discretization::{manufacture_rhs, Polynomial, Profile};
        let mesh = build_mesh(1, 64).unwrap();
        let op = OperatorSpec::p_laplacian(2.0, 0.0).unwrap();
        let h = HSpec::Power { theta: 1.0 };
        let exact = Profile::Separable(vec![Polynomial::bubble()]);
        let ep = [Profile::Separable(vec![Polynomial(vec![0.0, 1.0])])];
        let f = manufacture_rhs(mesh, &op, &h, &ep, 0.0, &exact).unwrap();
        let e = crate::discretization::realize_vector(mesh, &ep).unwrap();
        let p = ProblemSpec::new(op, h, e, f, 0.0).unwrap();
        let v = exact.realize(mesh);
        let u = frozen_step(&p, &v, 1e-12).unwrap().field;
        let err = norm(&u.sub(&v).unwrap(), NormKind::Lq(2.0));
        assert!(err < 1e-3, "{err}");
    }
}
