use super::{DiscretizationError, Field, Mesh, MAX_DIM};

type Mat = [[f64; MAX_DIM]; MAX_DIM];

/// Principal part `a(x, s, ξ)` of the operator.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    /// `a_ε(ξ) = (|ξ|² + ε²)^{(p-2)/2} ξ`; `ε = 0` is the plain p-Laplacian.
    PLaplacian { p: f64, epsilon: f64 },
    /// `a(x, ξ) = M(x) ξ` with one symmetric positive-definite `N×N` matrix per node
    /// (row-major, node-major). Always `p = 2`.
    MatrixDiffusion { matrices: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    /// Coercivity constant: `a(ξ)·ξ ≥ α |ξ|^p`.
    pub alpha: f64,
    /// Growth constant: `|a| ≤ β (b(x) + |s|^{p-1} + |ξ|^{p-1})`.
    pub beta: f64,
    /// Growth offset `b(x)`; only used by growth diagnostics.
    pub growth_offset: Option<Field>,
}

impl OperatorSpec {
    pub fn p_laplacian(p: f64, epsilon: f64) -> Result<Self, DiscretizationError> {
        if !(p.is_finite() && p >= 2.0) {
            return Err(DiscretizationError::Exponent(p));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(DiscretizationError::Regularization(epsilon));
        }
        Ok(Self {
            kind: OperatorKind::PLaplacian { p, epsilon },
            alpha: 1.0,
            beta: 1.0,
            growth_offset: None,
        })
    }

    /// p-Laplacian with the default regularization `ε = 1e-8 · diam(Ω)/h`.
    pub fn p_laplacian_default(p: f64, mesh: &Mesh) -> Result<Self, DiscretizationError> {
        Self::p_laplacian(p, default_epsilon(mesh))
    }

    /// `M(x) ξ`; `α` and `β` are the extreme eigenvalues over all nodes.
    pub fn matrix_diffusion(
        mesh: &Mesh,
        matrix_at: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self, DiscretizationError> {
        let dim = mesh.dim();
        let mut matrices = Vec::with_capacity(mesh.node_count() * dim * dim);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for node in 0..mesh.node_count() {
            let m = matrix_at(&mesh.node_coords(node)[..dim]);
            if m.len() != dim * dim {
                return Err(DiscretizationError::Components {
                    expected: dim * dim,
                    found: m.len(),
                });
            }
            let mut full = [[0.0; MAX_DIM]; MAX_DIM];
            for i in 0..dim {
                for j in 0..dim {
                    full[i][j] = m[i * dim + j];
                    if (m[i * dim + j] - m[j * dim + i]).abs() > 1e-12 * m[i * dim + j].abs().max(1.0) {
                        return Err(DiscretizationError::NotSpd { node });
                    }
                }
            }
            let eig = symmetric_eigenvalues(full, dim);
            let (emin, emax) = eig[..dim]
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
            if !(emin > 0.0) {
                return Err(DiscretizationError::NotSpd { node });
            }
            lo = lo.min(emin);
            hi = hi.max(emax);
            matrices.extend_from_slice(&m);
        }
        Ok(Self {
            kind: OperatorKind::MatrixDiffusion { matrices },
            alpha: lo,
            beta: hi,
            growth_offset: None,
        })
    }

    pub fn p(&self) -> f64 {
        match self.kind {
            OperatorKind::PLaplacian { p, .. } => p,
            OperatorKind::MatrixDiffusion { .. } => 2.0,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.p() == 2.0
    }

    /// Cell coefficient matrix (mean of the corner matrices); identity for the p-Laplacian.
    pub(crate) fn cell_matrix(&self, mesh: &Mesh, cell: usize) -> Option<Mat> {
        match &self.kind {
            OperatorKind::PLaplacian { .. } => None,
            OperatorKind::MatrixDiffusion { matrices } => {
                let dim = mesh.dim();
                let corners = mesh.cell_corners(cell);
                let nc = mesh.corners_per_cell();
                let mut out = [[0.0; MAX_DIM]; MAX_DIM];
                for &node in &corners[..nc] {
                    let m = &matrices[node * dim * dim..(node + 1) * dim * dim];
                    for i in 0..dim {
                        for j in 0..dim {
                            out[i][j] += m[i * dim + j] / nc as f64;
                        }
                    }
                }
                Some(out)
            }
        }
    }

    /// `a(ξ)` for a cell with coefficient matrix `cell` (see [`Self::cell_matrix`]).
    pub(crate) fn flux(&self, cell: Option<&Mat>, xi: &[f64; MAX_DIM], dim: usize) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        match (&self.kind, cell) {
            (OperatorKind::PLaplacian { p, epsilon }, _) => {
                let w = plap_weight(*p, *epsilon, norm_sq(xi, dim));
                for d in 0..dim {
                    out[d] = w * xi[d];
                }
            }
            (OperatorKind::MatrixDiffusion { .. }, Some(m)) => {
                for i in 0..dim {
                    out[i] = (0..dim).map(|j| m[i][j] * xi[j]).sum();
                }
            }
            (OperatorKind::MatrixDiffusion { .. }, None) => unreachable!("cell matrix required"),
        }
        out
    }

    /// `∂a/∂ξ`.
    pub(crate) fn flux_jacobian(&self, cell: Option<&Mat>, xi: &[f64; MAX_DIM], dim: usize) -> Mat {
        match (&self.kind, cell) {
            (OperatorKind::PLaplacian { p, epsilon }, _) => {
                let r2 = norm_sq(xi, dim) + epsilon * epsilon;
                let w = plap_weight(*p, *epsilon, norm_sq(xi, dim));
                let mut out = [[0.0; MAX_DIM]; MAX_DIM];
                let c = if *p == 2.0 { 0.0 } else { (p - 2.0) * r2.powf((p - 4.0) / 2.0) };
                for i in 0..dim {
                    for j in 0..dim {
                        out[i][j] = c * xi[i] * xi[j];
                    }
                    out[i][i] += w;
                }
                out
            }
            (OperatorKind::MatrixDiffusion { .. }, Some(m)) => *m,
            (OperatorKind::MatrixDiffusion { .. }, None) => unreachable!("cell matrix required"),
        }
    }
}

/// `ε = 1e-8 · diam(Ω)/h`.
pub fn default_epsilon(mesh: &Mesh) -> f64 {
    1e-8 * mesh.diameter() / mesh.spacing()
}

#[inline]
fn norm_sq(xi: &[f64; MAX_DIM], dim: usize) -> f64 {
    xi[..dim].iter().map(|v| v * v).sum()
}

#[inline]
fn plap_weight(p: f64, epsilon: f64, xi_sq: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else {
        (xi_sq + epsilon * epsilon).powf((p - 2.0) / 2.0)
    }
}

/// `|ξ|^{p-2} ξ` with `ε = 0`.
pub fn p_laplacian_flux(p: f64, xi: &[f64]) -> Vec<f64> {
    let n2: f64 = xi.iter().map(|v| v * v).sum();
    let w = if p == 2.0 { 1.0 } else { n2.powf((p - 2.0) / 2.0) };
    xi.iter().map(|v| w * v).collect()
}

/// Eigenvalues of the leading `dim × dim` block of a symmetric matrix (cyclic Jacobi).
pub(crate) fn symmetric_eigenvalues(mut a: Mat, dim: usize) -> [f64; MAX_DIM] {
    for _sweep in 0..50 {
        let off: f64 = (0..dim)
            .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut out = [0.0; MAX_DIM];
    for i in 0..dim {
        out[i] = a[i][i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::build_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn random_xi(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-radius..radius)).collect();
            if dot(&v, &v).sqrt() <= radius {
                return v;
            }
        }
    }

    #[test]
    fn coercivity_and_growth_unregularized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [2.0, 2.5, 3.0, 4.0] {
            for _ in 0..20_000 {
                let xi = random_xi(&mut rng, 3, 10.0);
                let a = p_laplacian_flux(p, &xi);
                let n = dot(&xi, &xi).sqrt();
                // a(ξ)·ξ = |ξ|^p up to rounding
                assert!(dot(&a, &xi) >= n.powf(p) * (1.0 - 1e-12));
                let an = dot(&a, &a).sqrt();
                assert!((an - n.powf(p - 1.0)).abs() <= 1e-12 * n.powf(p - 1.0).max(1e-300));
            }
        }
    }

    #[test]
    fn coercivity_regularized() {
        let eps = 1e-3;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for p in [2.0, 3.0, 4.0] {
            let op = OperatorSpec::p_laplacian(p, eps).unwrap();
            for _ in 0..20_000 {
                let v = random_xi(&mut rng, 2, 10.0);
                let n = dot(&v, &v).sqrt();
                if n < 10.0 * eps {
                    continue;
                }
                let xi = [v[0], v[1], 0.0];
                let a = op.flux(None, &xi, 2);
                assert!(dot(&a[..2], &v) >= 0.99 * n.powf(p));
            }
        }
    }

    #[test]
    fn flux_jacobian_matches_finite_difference() {
        let op = OperatorSpec::p_laplacian(3.5, 1e-4).unwrap();
        let xi = [0.3, -1.2, 0.7];
        let j = op.flux_jacobian(None, &xi, 3);
        for c in 0..3 {
            let d = 1e-6;
            let mut xp = xi;
            let mut xm = xi;
            xp[c] += d;
            xm[c] -= d;
            let (ap, am) = (op.flux(None, &xp, 3), op.flux(None, &xm, 3));
            for r in 0..3 {
                let fd = (ap[r] - am[r]) / (2.0 * d);
                assert!((fd - j[r][c]).abs() < 1e-7, "({r},{c}) {fd} {}", j[r][c]);
            }
        }
    }

    #[test]
    fn matrix_diffusion_bounds() {
        let mesh = build_mesh(2, 3).unwrap();
        let op = OperatorSpec::matrix_diffusion(&mesh, |x| vec![2.0 + x[0], 0.5, 0.5, 1.0]).unwrap();
        assert_eq!(op.p(), 2.0);
        // eigenvalues of [[a, .5], [.5, 1]]
        let eig = |a: f64| {
            let tr = a + 1.0;
            let det = a - 0.25;
            let disc = (tr * tr / 4.0 - det).sqrt();
            (tr / 2.0 - disc, tr / 2.0 + disc)
        };
        assert!((op.alpha - eig(2.0).0).abs() < 1e-12);
        assert!((op.beta - eig(3.0).1).abs() < 1e-12);

        let err = OperatorSpec::matrix_diffusion(&mesh, |_| vec![1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(err, Err(DiscretizationError::NotSpd { .. })));
        let err = OperatorSpec::matrix_diffusion(&mesh, |_| vec![1.0, 0.2, 0.0, 1.0]);
        assert!(matches!(err, Err(DiscretizationError::NotSpd { .. })));
    }

    #[test]
    fn jacobi_eigenvalues_3x3() {
        let a = [[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let mut e = symmetric_eigenvalues(a, 3);
        e.sort_by(|x, y| x.partial_cmp(y).unwrap());
        // roots of the characteristic polynomial: 3 - √3, 3, 3 + √3
        let s3 = 3f64.sqrt();
        assert!((e[0] - (3.0 - s3)).abs() < 1e-12);
        assert!((e[1] - 3.0).abs() < 1e-12);
        assert!((e[2] - (3.0 + s3)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(OperatorSpec::p_laplacian(1.5, 0.0).is_err());
        assert!(OperatorSpec::p_laplacian(3.0, -1.0).is_err());
    }
}
