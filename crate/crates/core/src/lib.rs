//! Numerical solvers and a-priori bound checks for quasi-linear elliptic
//! Dirichlet problems with superlinear convection,
//!
//! ```text
//! -div a(x, u, Du) + μ u = -div(h(u) E) + f   in (0,1)^N,     u = 0 on the boundary,
//! ```
//!
//! with `a` of p-Laplacian type (`p ≥ 2`).

pub mod convection_profile;
pub mod discretization;
pub mod estimates;
pub mod linalg;
mod quadrature;
pub mod solver;
pub mod truncation;

pub use convection_profile::{Convection, CustomH, HSpec};
pub use discretization::{Field, Mesh, OperatorSpec, VectorField};
