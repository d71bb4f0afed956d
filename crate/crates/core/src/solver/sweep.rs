use rayon::prelude::*;

use super::newton::newton;
use super::{NewtonOptions, ProblemSpec, SolveReport, SolverError};
use crate::discretization::{norm, ConvectionTerm, Field, NormKind, WeakForm};
use crate::truncation::{Truncate, TruncatedConvection, TruncationLevel};

/// Consecutive `‖u_n‖∞` closer than this count as stabilized.
pub const STABILIZATION_TOL: f64 = 1e-10;

/// Solves the problem with `h` replaced by `T_n∘h` and `E`, `f` clamped to
/// `[-n, n]` componentwise, from `u = 0`.
pub fn solve_truncated(problem: &ProblemSpec, level: f64, tol: f64, max_iter: usize) -> Result<SolveReport, SolverError> {
    let level = TruncationLevel::new(level).map_err(|e| SolverError::Precondition(e.to_string()))?;
    let h = TruncatedConvection {
        inner: &problem.h,
        level,
    };
    let e = problem.e.truncated(level);
    let f = problem.f.truncated(level);
    let form = WeakForm {
        op: &problem.op,
        convection: ConvectionTerm::Coupled(&h),
        e: &e,
        f: &f,
        mu: problem.mu,
    };
    let opts = NewtonOptions {
        tol,
        max_iter,
        ..NewtonOptions::default()
    };
    newton(problem, &form, &Field::zeros(problem.mesh), &opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub level: f64,
    pub converged: bool,
    pub iterations: usize,
    pub linf: f64,
    pub w1p: f64,
    pub l1: f64,
    pub l2: f64,
    /// `|‖u_n‖∞ − ‖u_{n−1}‖∞| < STABILIZATION_TOL`; false for the first level.
    pub stable_with_previous: bool,
    pub field: Field,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    /// Some level from which every later level agrees with its predecessor.
    pub stabilized: bool,
    /// The first level of the stabilized tail.
    pub stabilization_level: Option<f64>,
}

impl SweepReport {
    pub fn levels(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.level).collect()
    }
}

/// Runs [`solve_truncated`] at every level (in parallel) and records norms.
/// A level that fails to converge is recorded and the sweep continues.
pub fn truncation_sweep(problem: &ProblemSpec, levels: &[f64], tol: f64, max_iter: usize) -> Result<SweepReport, SolverError> {
    if levels.is_empty() {
        return Err(SolverError::Precondition("no truncation levels".into()));
    }
    if levels.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SolverError::Precondition("truncation levels must be strictly increasing".into()));
    }
    let p = problem.p();
    let reports: Vec<SolveReport> = levels
        .par_iter()
        .map(|&k| solve_truncated(problem, k, tol, max_iter))
        .collect::<Result<_, _>>()?;
    let mut entries: Vec<SweepEntry> = Vec::with_capacity(levels.len());
    for (&level, rep) in levels.iter().zip(reports) {
        let u = rep.field;
        let linf = norm(&u, NormKind::Linf);
        let stable_with_previous = entries
            .last()
            .is_some_and(|prev| prev.converged && rep.converged && (linf - prev.linf).abs() < STABILIZATION_TOL);
        entries.push(SweepEntry {
            level,
            converged: rep.converged,
            iterations: rep.iterations,
            linf,
            w1p: norm(&u, NormKind::W1pSeminorm(p)),
            l1: norm(&u, NormKind::Lq(1.0)),
            l2: norm(&u, NormKind::Lq(2.0)),
            stable_with_previous,
            field: u,
        });
    }
    let tail = entries.iter().rev().take_while(|e| e.stable_with_previous).count();
    let stabilized = tail > 0;
    let stabilization_level = stabilized.then(|| entries[entries.len() - 1 - tail].level);
    Ok(SweepReport {
        entries,
        stabilized,
        stabilization_level,
    })
}
