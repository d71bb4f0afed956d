use super::DiscretizationError;

pub const MAX_DIM: usize = 3;

/// Uniform tensor grid on the unit cube `(0,1)^N` with `n` cells per axis.
///
/// Nodes are numbered lexicographically with the first axis running fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mesh {
    dim: usize,
    cells: usize,
}

impl Mesh {
    pub fn new(dim: usize, cells: usize) -> Result<Self, DiscretizationError> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(DiscretizationError::Dimension(dim));
        }
        if cells < 2 {
            return Err(DiscretizationError::Cells(cells));
        }
        Ok(Self { dim, cells })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.cells + 1
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.cells as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn diameter(&self) -> f64 {
        (self.dim as f64).sqrt()
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis().pow(self.dim as u32)
    }

    pub fn cell_count(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    pub fn interior_count(&self) -> usize {
        (self.cells - 1).pow(self.dim as u32)
    }

    /// Number of corners of a cell, `2^N`.
    pub fn corners_per_cell(&self) -> usize {
        1 << self.dim
    }

    fn stride(&self, axis: usize) -> usize {
        self.nodes_per_axis().pow(axis as u32)
    }

    pub fn node_multi_index(&self, node: usize) -> [usize; MAX_DIM] {
        let m = self.nodes_per_axis();
        let mut idx = [0; MAX_DIM];
        let mut rest = node;
        for slot in idx.iter_mut().take(self.dim) {
            *slot = rest % m;
            rest /= m;
        }
        idx
    }

    pub fn node_coords(&self, node: usize) -> [f64; MAX_DIM] {
        let idx = self.node_multi_index(node);
        let h = self.spacing();
        let mut x = [0.0; MAX_DIM];
        for d in 0..self.dim {
            x[d] = idx[d] as f64 * h;
        }
        x
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        let idx = self.node_multi_index(node);
        idx[..self.dim].iter().any(|&i| i == 0 || i == self.cells)
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| !self.is_boundary(i)).collect()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| self.is_boundary(i)).collect()
    }

    /// Node → unknown index, `None` on the boundary.
    pub fn dof_map(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        (0..self.node_count())
            .map(|i| {
                if self.is_boundary(i) {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    }

    /// Lowest-index corner of cell `cell`.
    fn cell_base(&self, cell: usize) -> usize {
        let mut rest = cell;
        let mut base = 0;
        for d in 0..self.dim {
            base += (rest % self.cells) * self.stride(d);
            rest /= self.cells;
        }
        base
    }

    /// Corner node indices of `cell`; corner `k` sits at offset `bit d of k` along axis `d`.
    pub fn cell_corners(&self, cell: usize) -> [usize; 1 << MAX_DIM] {
        let base = self.cell_base(cell);
        let mut out = [0; 1 << MAX_DIM];
        for (k, slot) in out.iter_mut().enumerate().take(self.corners_per_cell()) {
            *slot = base
                + (0..self.dim)
                    .filter(|d| k >> d & 1 == 1)
                    .map(|d| self.stride(d))
                    .sum::<usize>();
        }
        out
    }

    pub fn cell_midpoint(&self, cell: usize) -> [f64; MAX_DIM] {
        let mut x = self.node_coords(self.cell_base(cell));
        let half = 0.5 * self.spacing();
        for xd in x.iter_mut().take(self.dim) {
            *xd += half;
        }
        x
    }

    /// Sign of `∂φ_k/∂x_d` at a cell midpoint.
    #[inline]
    pub(crate) fn corner_sign(k: usize, d: usize) -> f64 {
        if k >> d & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

/// `build_mesh(N, n)`: uniform grid with `n` cells per axis on `(0,1)^N`.
pub fn build_mesh(dim: usize, cells: usize) -> Result<Mesh, DiscretizationError> {
    Mesh::new(dim, cells)
}
