//! Structured grids on `(0,1)^N`, nodal fields, and the discrete weak form.

mod assembly;
mod field;
pub mod io;
mod manufactured;
mod mesh;
mod norms;
mod operator;

use thiserror::Error;

pub use assembly::{assemble_jacobian, assemble_residual, residual_norm, ConvectionTerm, WeakForm};
pub use field::{Field, VectorField};
pub use manufactured::{manufacture_rhs, realize_vector, Polynomial, Profile};
pub use mesh::{build_mesh, Mesh, MAX_DIM};
pub use norms::{integrate_cells, norm, NormKind};
pub use operator::{default_epsilon, p_laplacian_flux, OperatorKind, OperatorSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizationError {
    #[error("dimension {0} is not supported (expected 1, 2 or 3)")]
    Dimension(usize),
    #[error("need at least 2 cells per axis, got {0}")]
    Cells(usize),
    #[error("expected {expected} values, found {found}")]
    Length { expected: usize, found: usize },
    #[error("expected {expected} components, found {found}")]
    Components { expected: usize, found: usize },
    #[error("fields live on different meshes")]
    MeshMismatch,
    #[error("non-finite nodal values in {0}")]
    NonFinite(&'static str),
    #[error("exponent p = {0} is outside the supported range p >= 2")]
    Exponent(f64),
    #[error("regularization must be finite and non-negative, got {0}")]
    Regularization(f64),
    #[error("diffusion matrix at node {node} is not symmetric positive definite")]
    NotSpd { node: usize },
    #[error("Jacobian is singular: zero gradient in cell {cell} with p > 2 and no regularization")]
    SingularJacobian { cell: usize },
    #[error("manufactured data outside the supported catalog: {0}")]
    Catalog(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for DiscretizationError {
    fn from(e: csv::Error) -> Self {
        DiscretizationError::Csv(e.to_string())
    }
}

impl From<std::io::Error> for DiscretizationError {
    fn from(e: std::io::Error) -> Self {
        DiscretizationError::Csv(e.to_string())
    }
}
