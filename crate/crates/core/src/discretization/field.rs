use super::{DiscretizationError, Mesh, MAX_DIM};

/// Nodal scalar function on a [`Mesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    mesh: Mesh,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(mesh: Mesh) -> Self {
        Self {
            mesh,
            values: vec![0.0; mesh.node_count()],
        }
    }

    pub fn constant(mesh: Mesh, value: f64) -> Self {
        Self {
            mesh,
            values: vec![value; mesh.node_count()],
        }
    }

    pub fn from_values(mesh: Mesh, values: Vec<f64>) -> Result<Self, DiscretizationError> {
        if values.len() != mesh.node_count() {
            return Err(DiscretizationError::Length {
                expected: mesh.node_count(),
                found: values.len(),
            });
        }
        Ok(Self { mesh, values })
    }

    /// Nodal interpolant of `g`.
    pub fn from_fn(mesh: Mesh, g: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..mesh.node_count())
            .map(|i| g(&mesh.node_coords(i)[..mesh.dim()]))
            .collect();
        Self { mesh, values }
    }

    /// Field with the given interior values and zeros on the boundary.
    pub fn from_interior(mesh: Mesh, interior: &[f64]) -> Result<Self, DiscretizationError> {
        if interior.len() != mesh.interior_count() {
            return Err(DiscretizationError::Length {
                expected: mesh.interior_count(),
                found: interior.len(),
            });
        }
        let mut values = vec![0.0; mesh.node_count()];
        for (node, dof) in mesh.dof_map().into_iter().enumerate() {
            if let Some(dof) = dof {
                values[node] = interior[dof];
            }
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn interior_values(&self) -> Vec<f64> {
        self.mesh
            .dof_map()
            .iter()
            .zip(&self.values)
            .filter_map(|(dof, &v)| dof.map(|_| v))
            .collect()
    }

    /// Writes `interior` into the interior nodes, leaving the boundary as is.
    pub fn set_interior(&mut self, interior: &[f64]) {
        let map = self.mesh.dof_map();
        for (node, dof) in map.into_iter().enumerate() {
            if let Some(dof) = dof {
                self.values[node] = interior[dof];
            }
        }
    }

    pub fn satisfies_dirichlet(&self) -> bool {
        self.mesh
            .boundary_nodes()
            .into_iter()
            .all(|i| self.values[i] == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Self {
        Self {
            mesh: self.mesh,
            values: self.values.iter().map(|&v| g(v)).collect(),
        }
    }

    pub fn sub(&self, other: &Field) -> Result<Field, DiscretizationError> {
        if self.mesh != other.mesh {
            return Err(DiscretizationError::MeshMismatch);
        }
        Ok(Self {
            mesh: self.mesh,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// Value at the midpoint of `cell`: the mean of its corner values.
    pub fn cell_average(&self, cell: usize) -> f64 {
        let corners = self.mesh.cell_corners(cell);
        let nc = self.mesh.corners_per_cell();
        corners[..nc].iter().map(|&i| self.values[i]).sum::<f64>() / nc as f64
    }

    /// Cellwise constant gradient: along each axis, the mean of the edge differences.
    pub fn cell_gradient(&self, cell: usize) -> [f64; MAX_DIM] {
        let corners = self.mesh.cell_corners(cell);
        let dim = self.mesh.dim();
        let nc = self.mesh.corners_per_cell();
        let scale = 1.0 / (self.mesh.spacing() * (nc / 2) as f64);
        let mut g = [0.0; MAX_DIM];
        for (d, gd) in g.iter_mut().enumerate().take(dim) {
            let mut acc = 0.0;
            for (k, &node) in corners[..nc].iter().enumerate() {
                acc += Mesh::corner_sign(k, d) * self.values[node];
            }
            *gd = acc * scale;
        }
        g
    }
}

/// Nodal vector function with `N` components per node (node-major storage).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    mesh: Mesh,
    values: Vec<f64>,
}

impl VectorField {
    pub fn zeros(mesh: Mesh) -> Self {
        Self {
            mesh,
            values: vec![0.0; mesh.node_count() * mesh.dim()],
        }
    }

    pub fn constant(mesh: Mesh, value: &[f64]) -> Result<Self, DiscretizationError> {
        if value.len() != mesh.dim() {
            return Err(DiscretizationError::Components {
                expected: mesh.dim(),
                found: value.len(),
            });
        }
        Ok(Self {
            mesh,
            values: value.repeat(mesh.node_count()),
        })
    }

    pub fn from_fn(mesh: Mesh, g: impl Fn(&[f64]) -> [f64; MAX_DIM]) -> Self {
        let dim = mesh.dim();
        let mut values = Vec::with_capacity(mesh.node_count() * dim);
        for i in 0..mesh.node_count() {
            let v = g(&mesh.node_coords(i)[..dim]);
            values.extend_from_slice(&v[..dim]);
        }
        Self { mesh, values }
    }

    pub fn from_values(mesh: Mesh, values: Vec<f64>) -> Result<Self, DiscretizationError> {
        let expected = mesh.node_count() * mesh.dim();
        if values.len() != expected {
            return Err(DiscretizationError::Length {
                expected,
                found: values.len(),
            });
        }
        Ok(Self { mesh, values })
    }

    /// Builds the field from one scalar field per component.
    pub fn from_components(components: &[Field]) -> Result<Self, DiscretizationError> {
        let mesh = *components.first().ok_or(DiscretizationError::Components {
            expected: 1,
            found: 0,
        })?.mesh();
        if components.len() != mesh.dim() {
            return Err(DiscretizationError::Components {
                expected: mesh.dim(),
                found: components.len(),
            });
        }
        if components.iter().any(|c| *c.mesh() != mesh) {
            return Err(DiscretizationError::MeshMismatch);
        }
        let mut values = Vec::with_capacity(mesh.node_count() * mesh.dim());
        for i in 0..mesh.node_count() {
            values.extend(components.iter().map(|c| c.values()[i]));
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn components(&self) -> usize {
        self.mesh.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, node: usize) -> &[f64] {
        let d = self.mesh.dim();
        &self.values[node * d..(node + 1) * d]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Pointwise Euclidean length as a scalar field.
    pub fn magnitude(&self) -> Field {
        let values = (0..self.mesh.node_count())
            .map(|i| self.at(i).iter().map(|c| c * c).sum::<f64>().sqrt())
            .collect();
        Field {
            mesh: self.mesh,
            values,
        }
    }

    pub fn cell_average(&self, cell: usize) -> [f64; MAX_DIM] {
        let corners = self.mesh.cell_corners(cell);
        let nc = self.mesh.corners_per_cell();
        let mut out = [0.0; MAX_DIM];
        for &node in &corners[..nc] {
            for (o, v) in out.iter_mut().zip(self.at(node)) {
                *o += v;
            }
        }
        for o in out.iter_mut() {
            *o /= nc as f64;
        }
        out
    }
}
