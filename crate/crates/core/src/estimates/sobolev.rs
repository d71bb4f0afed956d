//! Discrete Sobolev constants `sup ‖u‖_q / ‖Du‖_p` over Dirichlet fields.
//!
//! Each restart maximizes `ln ‖u‖_q − ln ‖Du‖_p` by gradient ascent in the
//! discrete H¹ metric (the gradient is smoothed by one Laplacian solve), with
//! the iterate rescaled to `‖Du‖_p = 1` after every step. For `q = ∞` the
//! ascent runs through `q = 4, 8, …, 256` and then polishes on the nodal maximum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::EstimateError;
use crate::convection_profile::HSpec;
use crate::discretization::{assemble_jacobian, norm, Field, Mesh, NormKind, OperatorSpec, VectorField, MAX_DIM};
use crate::linalg::{conjugate_gradient, CsrMatrix, KrylovOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevOptions {
    pub restarts: usize,
    /// Ascent steps per stage.
    pub max_iter: usize,
    /// Stop a stage once one step improves the log-ratio by less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SobolevOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iter: 400,
            tol: 1e-11,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SobolevEstimate {
    pub value: f64,
    pub best_restart: usize,
    pub restart_values: Vec<f64>,
    /// False when no restart met the stopping tolerance within its budget.
    pub converged: bool,
    pub maximizer: Field,
}

/// `q ≤ p*` when `N > p`, any finite `q` when `N = p`, anything when `N < p`.
pub fn is_admissible(n: usize, p: f64, q: f64) -> bool {
    let nf = n as f64;
    if q.is_nan() || q < 1.0 {
        return false;
    }
    if nf > p {
        q <= p * nf / (nf - p)
    } else if nf == p {
        q.is_finite()
    } else {
        true
    }
}

/// `‖u‖_q / ‖Du‖_p`, with `q = ∞` meaning the largest nodal value.
pub fn sobolev_ratio(u: &Field, p: f64, q: f64) -> f64 {
    let num = if q.is_infinite() {
        norm(u, NormKind::Linf)
    } else {
        norm(u, NormKind::Lq(q))
    };
    num / norm(u, NormKind::W1pSeminorm(p))
}

pub fn estimate_sobolev_constant(mesh: &Mesh, p: f64, q: f64) -> Result<f64, EstimateError> {
    Ok(estimate_sobolev_constant_with(mesh, p, q, &SobolevOptions::default())?.value)
}

pub fn estimate_sobolev_constant_with(
    mesh: &Mesh,
    p: f64,
    q: f64,
    opts: &SobolevOptions,
) -> Result<SobolevEstimate, EstimateError> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(EstimateError::Input(format!("p must be at least 1, got {p}")));
    }
    if !is_admissible(mesh.dim(), p, q) {
        return Err(EstimateError::Input(format!(
            "q = {q} is not admissible for p = {p} in dimension {}",
            mesh.dim()
        )));
    }
    if opts.restarts == 0 {
        return Err(EstimateError::Input("need at least one restart".into()));
    }
    let ascent = Ascent::new(*mesh, p)?;
    let runs: Vec<(f64, bool, Field)> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| ascent.run(q, opts, i))
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.0 > runs[best].0 {
            best = i;
        }
    }
    Ok(SobolevEstimate {
        value: runs[best].0,
        best_restart: best,
        restart_values: runs.iter().map(|r| r.0).collect(),
        converged: runs.iter().any(|r| r.1),
        maximizer: runs[best].2.clone(),
    })
}

#[derive(Clone, Copy)]
enum Target {
    Cells(f64),
    NodalMax,
}

struct Ascent {
    mesh: Mesh,
    p: f64,
    dofs: Vec<Option<usize>>,
    stiffness: CsrMatrix,
    grad_scale: f64,
}

impl Ascent {
    fn new(mesh: Mesh, p: f64) -> Result<Self, EstimateError> {
        let laplace = OperatorSpec::p_laplacian(2.0, 0.0)?;
        let stiffness = assemble_jacobian(&laplace, &HSpec::Zero, &VectorField::zeros(mesh), 0.0, &Field::zeros(mesh))?;
        Ok(Self {
            mesh,
            p,
            dofs: mesh.dof_map(),
            stiffness,
            grad_scale: 1.0 / (mesh.spacing() * (mesh.corners_per_cell() / 2) as f64),
        })
    }

    fn field(&self, x: &[f64]) -> Field {
        Field::from_interior(self.mesh, x).expect("interior length matches")
    }

    fn objective(&self, u: &Field, target: Target) -> f64 {
        let top = match target {
            Target::Cells(q) => norm(u, NormKind::Lq(q)),
            Target::NodalMax => norm(u, NormKind::Linf),
        };
        top.ln() - norm(u, NormKind::W1pSeminorm(self.p)).ln()
    }

    /// Euclidean gradient of the objective with respect to the interior values.
    fn gradient(&self, u: &Field, target: Target) -> Vec<f64> {
        let mesh = &self.mesh;
        let dim = mesh.dim();
        let corners = mesh.corners_per_cell();
        let phi = 1.0 / corners as f64;
        let mut out = vec![0.0; mesh.interior_count()];

        // −d ln‖Du‖_p, scaled by the largest cell gradient to stay finite
        let grads: Vec<[f64; MAX_DIM]> = (0..mesh.cell_count()).map(|c| u.cell_gradient(c)).collect();
        let mags: Vec<f64> = grads.iter().map(|g| g[..dim].iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
        let gmax = mags.iter().fold(0.0_f64, |m, &v| m.max(v));
        let denom: f64 = mags.iter().map(|m| (m / gmax).powf(self.p)).sum();
        for c in 0..mesh.cell_count() {
            if mags[c] == 0.0 {
                continue;
            }
            let w = (mags[c] / gmax).powf(self.p - 2.0) / (gmax * gmax * denom);
            let cc = mesh.cell_corners(c);
            for (k, &node) in cc.iter().enumerate().take(corners) {
                if let Some(i) = self.dofs[node] {
                    let dot: f64 = (0..dim).map(|d| Mesh::corner_sign(k, d) * self.grad_scale * grads[c][d]).sum();
                    out[i] -= w * dot;
                }
            }
        }

        match target {
            Target::Cells(q) => {
                let avgs: Vec<f64> = (0..mesh.cell_count()).map(|c| u.cell_average(c)).collect();
                let amax = avgs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                let denom: f64 = avgs.iter().map(|a| (a.abs() / amax).powf(q)).sum();
                for c in 0..mesh.cell_count() {
                    let a = avgs[c];
                    if a == 0.0 {
                        continue;
                    }
                    let w = (a.abs() / amax).powf(q - 1.0) * a.signum() / (amax * denom) * phi;
                    for &node in mesh.cell_corners(c).iter().take(corners) {
                        if let Some(i) = self.dofs[node] {
                            out[i] += w;
                        }
                    }
                }
            }
            Target::NodalMax => {
                let (node, val) = u
                    .values()
                    .iter()
                    .enumerate()
                    .fold((0, 0.0_f64), |(bi, bv), (i, &v)| if v.abs() > bv.abs() { (i, v) } else { (bi, bv) });
                if let Some(i) = self.dofs[node] {
                    out[i] += 1.0 / val;
                }
            }
        }
        out
    }

    fn normalize(&self, x: &mut [f64]) {
        let s = norm(&self.field(x), NormKind::W1pSeminorm(self.p));
        for v in x.iter_mut() {
            *v /= s;
        }
    }

    /// One ascent stage; returns whether the step tolerance was met.
    fn stage(&self, x: &mut Vec<f64>, target: Target, opts: &SobolevOptions) -> bool {
        let krylov = KrylovOptions {
            rel_tol: 1e-8,
            ..KrylovOptions::default()
        };
        self.normalize(x);
        let mut value = self.objective(&self.field(x), target);
        let mut tau = f64::NAN;
        for _ in 0..opts.max_iter {
            let u = self.field(x);
            let g = self.gradient(&u, target);
            let Ok(sol) = conjugate_gradient(&self.stiffness, &g, &krylov) else {
                return false;
            };
            let d = sol.x;
            let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            if !(slope > 0.0) {
                return true;
            }
            let xmax = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let dmax = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            tau = if tau.is_nan() { 0.5 * xmax / dmax } else { 2.0 * tau };
            let mut accepted = None;
            for _ in 0..50 {
                let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + tau * b).collect();
                let tv = self.objective(&self.field(&trial), target);
                if tv.is_finite() && tv >= value + 1e-4 * tau * slope {
                    accepted = Some((trial, tv));
                    break;
                }
                tau *= 0.5;
            }
            let Some((mut trial, tv)) = accepted else {
                return true;
            };
            self.normalize(&mut trial);
            let gain = tv - value;
            *x = trial;
            value = tv;
            if gain < opts.tol {
                return true;
            }
        }
        false
    }

    fn run(&self, q: f64, opts: &SobolevOptions, restart: usize) -> (f64, bool, Field) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(restart as u64);
        let mut x: Vec<f64> = (0..self.mesh.interior_count()).map(|_| rng.gen_range(0.05..1.0)).collect();
        let converged = if q.is_infinite() {
            let mut q_stage = 4.0;
            while q_stage <= 256.0 {
                self.stage(&mut x, Target::Cells(q_stage), opts);
                q_stage *= 2.0;
            }
            self.stage(&mut x, Target::NodalMax, opts)
        } else {
            self.stage(&mut x, Target::Cells(q), opts)
        };
        let u = self.field(&x);
        (sobolev_ratio(&u, self.p, q), converged, u)
    }
}
