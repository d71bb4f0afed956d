use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{solve_newton_with, NewtonOptions, ProblemSpec, SolveReport, SolverError};
use crate::discretization::{norm, Field, Mesh, NormKind};

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    /// Largest `‖u_i − u_j‖_p` over converged pairs.
    pub max_distance: f64,
    pub reports: Vec<SolveReport>,
    /// Seed indices whose solve did not converge.
    pub excluded: Vec<usize>,
}

/// Interior values uniform in `[-amplitude, amplitude]`, zero on the boundary.
pub fn random_dirichlet_seeds(mesh: Mesh, count: usize, seed: u64, amplitude: f64) -> Vec<Field> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let interior: Vec<f64> = (0..mesh.interior_count())
                .map(|_| rng.gen_range(-amplitude..=amplitude))
                .collect();
            Field::from_interior(mesh, &interior).expect("interior length matches")
        })
        .collect()
}

/// Solves from every seed and measures how far apart the solutions land.
pub fn uniqueness_experiment(
    problem: &ProblemSpec,
    seeds: &[Field],
    opts: &NewtonOptions,
) -> Result<UniquenessReport, SolverError> {
    if seeds.is_empty() {
        return Err(SolverError::Precondition("no seeds".into()));
    }
    let reports: Vec<SolveReport> = seeds
        .par_iter()
        .map(|u0| solve_newton_with(problem, u0, opts))
        .collect::<Result<_, _>>()?;
    let excluded: Vec<usize> = (0..reports.len()).filter(|&i| !reports[i].converged).collect();
    let p = problem.p();
    let mut max_distance: f64 = 0.0;
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            if reports[i].converged && reports[j].converged {
                let d = norm(&reports[i].field.sub(&reports[j].field)?, NormKind::Lq(p));
                max_distance = max_distance.max(d);
            }
        }
    }
    Ok(UniquenessReport {
        max_distance,
        reports,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convection_profile::HSpec;
    use crate::discretization::{build_mesh, OperatorSpec, VectorField};

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        let mesh = build_mesh(2, 5).unwrap();
        let a = random_dirichlet_seeds(mesh, 3, 9, 1.0);
        let b = random_dirichlet_seeds(mesh, 3, 9, 1.0);
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
        assert!(a.iter().all(|f| f.satisfies_dirichlet()));
    }

    #[test]
    fn linear_problem_is_seed_independent() {
        let mesh = build_mesh(1, 32).unwrap();
        let problem = ProblemSpec::new(
            OperatorSpec::p_laplacian(2.0, 0.0).unwrap(),
            HSpec::Zero,
            VectorField::zeros(mesh),
            Field::constant(mesh, 1.0),
            0.0,
        )
        .unwrap();
        let seeds = random_dirichlet_seeds(mesh, 4, 1, 2.0);
        let opts = NewtonOptions { tol: 1e-12, ..NewtonOptions::default() };
        let rep = uniqueness_experiment(&problem, &seeds, &opts).unwrap();
        assert!(rep.excluded.is_empty());
        assert!(rep.max_distance <= 1e-12, "{}", rep.max_distance);

        let same = vec![seeds[0].clone(), seeds[0].clone()];
        assert_eq!(uniqueness_experiment(&problem, &same, &opts).unwrap().max_distance, 0.0);
    }
}
