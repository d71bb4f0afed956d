//! Discrete weak form
//!
//! ```text
//! ∫ a(x,u,Du)·Dφ_i + μ ∫ u φ_i − ∫ h(u) E·Dφ_i − ∫ f φ_i = 0     for interior nodes i
//! ```
//!
//! on multilinear nodal basis functions, with every cell integral evaluated at
//! the cell midpoint: `u`, `E`, `f` by the mean of the corner values and `Du`
//! by the mean of the edge differences. In 1D this is exactly the P1 element
//! with midpoint quadrature.

use super::{DiscretizationError, Field, Mesh, OperatorKind, OperatorSpec, VectorField, MAX_DIM};
use crate::convection_profile::Convection;
use crate::linalg::CsrMatrix;

/// How the convection term enters the weak form.
#[derive(Clone, Copy)]
pub enum ConvectionTerm<'a> {
    /// `h(u) E`, linearized through `h'(u)` in the Jacobian.
    Coupled(&'a dyn Convection),
    /// `h(v) E` with `v` held fixed, a pure source term.
    Frozen { h: &'a dyn Convection, v: &'a Field },
}

/// One instance of the discrete problem.
#[derive(Clone, Copy)]
pub struct WeakForm<'a> {
    pub op: &'a OperatorSpec,
    pub convection: ConvectionTerm<'a>,
    pub e: &'a VectorField,
    pub f: &'a Field,
    pub mu: f64,
}

struct CellGeometry {
    dim: usize,
    corners: usize,
    volume: f64,
    /// `Dφ_k` at the midpoint, per corner.
    grad_phi: [[f64; MAX_DIM]; 1 << MAX_DIM],
    /// `φ_k` at the midpoint.
    phi: f64,
}

impl CellGeometry {
    fn new(mesh: &Mesh) -> Self {
        let dim = mesh.dim();
        let corners = mesh.corners_per_cell();
        let scale = 1.0 / (mesh.spacing() * (corners / 2) as f64);
        let mut grad_phi = [[0.0; MAX_DIM]; 1 << MAX_DIM];
        for (k, g) in grad_phi.iter_mut().enumerate().take(corners) {
            for (d, gd) in g.iter_mut().enumerate().take(dim) {
                *gd = Mesh::corner_sign(k, d) * scale;
            }
        }
        Self {
            dim,
            corners,
            volume: mesh.cell_volume(),
            grad_phi,
            phi: 1.0 / corners as f64,
        }
    }

    fn dot(&self, a: &[f64; MAX_DIM], b: &[f64; MAX_DIM]) -> f64 {
        (0..self.dim).map(|d| a[d] * b[d]).sum()
    }
}

impl<'a> WeakForm<'a> {
    pub fn mesh(&self) -> &Mesh {
        self.f.mesh()
    }

    fn check(&self, u: &Field) -> Result<(), DiscretizationError> {
        let mesh = self.f.mesh();
        if u.mesh() != mesh || self.e.mesh() != mesh {
            return Err(DiscretizationError::MeshMismatch);
        }
        if let ConvectionTerm::Frozen { v, .. } = self.convection {
            if v.mesh() != mesh {
                return Err(DiscretizationError::MeshMismatch);
            }
            if !v.is_finite() {
                return Err(DiscretizationError::NonFinite("frozen field v"));
            }
        }
        if !u.is_finite() {
            return Err(DiscretizationError::NonFinite("u"));
        }
        if !self.e.is_finite() {
            return Err(DiscretizationError::NonFinite("E"));
        }
        if !self.f.is_finite() {
            return Err(DiscretizationError::NonFinite("f"));
        }
        if let Some(b) = &self.op.growth_offset {
            if b.mesh() != mesh {
                return Err(DiscretizationError::MeshMismatch);
            }
        }
        Ok(())
    }

    fn convection_value(&self, cell: usize, u_mid: f64) -> f64 {
        match self.convection {
            ConvectionTerm::Coupled(h) => h.value(u_mid),
            ConvectionTerm::Frozen { h, v } => h.value(v.cell_average(cell)),
        }
    }

    /// Interior residual vector, one entry per unknown (see [`Mesh::dof_map`]).
    pub fn residual(&self, u: &Field) -> Result<Vec<f64>, DiscretizationError> {
        self.check(u)?;
        let mesh = *self.mesh();
        let geo = CellGeometry::new(&mesh);
        let dofs = mesh.dof_map();
        let mut r = vec![0.0; mesh.interior_count()];
        for cell in 0..mesh.cell_count() {
            let corners = mesh.cell_corners(cell);
            let u_mid = u.cell_average(cell);
            let grad = u.cell_gradient(cell);
            let m = self.op.cell_matrix(&mesh, cell);
            let flux = self.op.flux(m.as_ref(), &grad, geo.dim);
            let e_mid = self.e.cell_average(cell);
            let f_mid = self.f.cell_average(cell);
            let conv = self.convection_value(cell, u_mid);
            let mut drift = [0.0; MAX_DIM];
            for d in 0..geo.dim {
                drift[d] = flux[d] - conv * e_mid[d];
            }
            let mass = (self.mu * u_mid - f_mid) * geo.phi;
            for k in 0..geo.corners {
                if let Some(i) = dofs[corners[k]] {
                    r[i] += geo.volume * (geo.dot(&drift, &geo.grad_phi[k]) + mass);
                }
            }
        }
        Ok(r)
    }

    /// Derivative of [`Self::residual`] with respect to the interior values of `u`.
    pub fn jacobian(&self, u: &Field) -> Result<CsrMatrix, DiscretizationError> {
        self.check(u)?;
        let mesh = *self.mesh();
        if let OperatorKind::PLaplacian { p, epsilon } = self.op.kind {
            if epsilon == 0.0 && p > 2.0 {
                if let Some(cell) = (0..mesh.cell_count()).find(|&c| {
                    u.cell_gradient(c)[..mesh.dim()].iter().all(|&g| g == 0.0)
                }) {
                    return Err(DiscretizationError::SingularJacobian { cell });
                }
            }
        }
        let geo = CellGeometry::new(&mesh);
        let dofs = mesh.dof_map();
        let mut triplets = Vec::with_capacity(mesh.cell_count() * geo.corners * geo.corners);
        for cell in 0..mesh.cell_count() {
            let corners = mesh.cell_corners(cell);
            let grad = u.cell_gradient(cell);
            let m = self.op.cell_matrix(&mesh, cell);
            let jac = self.op.flux_jacobian(m.as_ref(), &grad, geo.dim);
            let e_mid = self.e.cell_average(cell);
            let dconv = match self.convection {
                ConvectionTerm::Coupled(h) => h.derivative(u.cell_average(cell)),
                ConvectionTerm::Frozen { .. } => 0.0,
            };
            // A Dφ_j, per corner j
            let mut a_grad = [[0.0; MAX_DIM]; 1 << MAX_DIM];
            for j in 0..geo.corners {
                for r in 0..geo.dim {
                    a_grad[j][r] = (0..geo.dim).map(|c| jac[r][c] * geo.grad_phi[j][c]).sum();
                }
            }
            for k in 0..geo.corners {
                let Some(row) = dofs[corners[k]] else { continue };
                let e_dot = geo.dot(&e_mid, &geo.grad_phi[k]);
                for j in 0..geo.corners {
                    let Some(col) = dofs[corners[j]] else { continue };
                    let val = geo.dot(&geo.grad_phi[k], &a_grad[j])
                        + self.mu * geo.phi * geo.phi
                        - dconv * geo.phi * e_dot;
                    triplets.push((row, col, geo.volume * val));
                }
            }
        }
        Ok(CsrMatrix::from_triplets(mesh.interior_count(), &triplets))
    }
}

pub fn assemble_residual(
    op: &OperatorSpec,
    h: &dyn Convection,
    e: &VectorField,
    f: &Field,
    mu: f64,
    u: &Field,
) -> Result<Vec<f64>, DiscretizationError> {
    WeakForm {
        op,
        convection: ConvectionTerm::Coupled(h),
        e,
        f,
        mu,
    }
    .residual(u)
}

pub fn assemble_jacobian(
    op: &OperatorSpec,
    h: &dyn Convection,
    e: &VectorField,
    mu: f64,
    u: &Field,
) -> Result<CsrMatrix, DiscretizationError> {
    let f = Field::zeros(*u.mesh());
    WeakForm {
        op,
        convection: ConvectionTerm::Coupled(h),
        e,
        f: &f,
        mu,
    }
    .jacobian(u)
}

/// `sqrt(Σ r_i²) · h^{-N/2}`: the discrete L² norm of the residual divided by
/// the cell volume, so it stays O(1) under refinement for a fixed strong-form defect.
pub fn residual_norm(mesh: &Mesh, r: &[f64]) -> f64 {
    let s: f64 = r.iter().map(|v| v * v).sum();
    s.sqrt() / mesh.cell_volume().sqrt()
}
