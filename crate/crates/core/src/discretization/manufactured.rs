//! Closed-form data on the unit cube and manufactured right-hand sides.

use super::{DiscretizationError, Field, Mesh, OperatorKind, OperatorSpec, VectorField, MAX_DIM};
use crate::convection_profile::HSpec;

/// Polynomial in one variable, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    /// `x(1 - x)`
    pub fn bubble() -> Self {
        Polynomial(vec![0.0, 1.0, -1.0])
    }
}

/// Closed-form scalar function on `(0,1)^N`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `Π_d P_d(x_d)` over the listed axes; axes beyond the list contribute a factor 1.
    Separable(Vec<Polynomial>),
}

type Vec3 = [f64; MAX_DIM];
type Mat3 = [[f64; MAX_DIM]; MAX_DIM];

impl Profile {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Separable(factors) => factors
                .iter()
                .zip(x)
                .map(|(p, &xd)| p.eval(xd))
                .product(),
        }
    }

    fn derivatives(&self, x: &[f64]) -> (f64, Vec3, Mat3) {
        let dim = x.len();
        let mut grad = [0.0; MAX_DIM];
        let mut hess = [[0.0; MAX_DIM]; MAX_DIM];
        let factors = match self {
            Profile::Constant(c) => return (*c, grad, hess),
            Profile::Separable(f) => f,
        };
        let one = Polynomial(vec![1.0]);
        let p: Vec<&Polynomial> = (0..dim).map(|d| factors.get(d).unwrap_or(&one)).collect();
        let d1: Vec<Polynomial> = p.iter().map(|q| q.derivative()).collect();
        let d2: Vec<Polynomial> = d1.iter().map(|q| q.derivative()).collect();
        let v: Vec<f64> = (0..dim).map(|d| p[d].eval(x[d])).collect();
        let v1: Vec<f64> = (0..dim).map(|d| d1[d].eval(x[d])).collect();
        let v2: Vec<f64> = (0..dim).map(|d| d2[d].eval(x[d])).collect();
        let prod_except = |skip: &[usize]| -> f64 {
            (0..dim).filter(|d| !skip.contains(d)).map(|d| v[d]).product()
        };
        for i in 0..dim {
            grad[i] = v1[i] * prod_except(&[i]);
            for j in 0..dim {
                hess[i][j] = if i == j {
                    v2[i] * prod_except(&[i])
                } else {
                    v1[i] * v1[j] * prod_except(&[i, j])
                };
            }
        }
        (v.iter().product(), grad, hess)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec3 {
        self.derivatives(x).1
    }

    pub fn realize(&self, mesh: Mesh) -> Field {
        Field::from_fn(mesh, |x| self.value(x))
    }
}

/// Realizes one profile per component.
pub fn realize_vector(mesh: Mesh, components: &[Profile]) -> Result<VectorField, DiscretizationError> {
    if components.len() != mesh.dim() {
        return Err(DiscretizationError::Components {
            expected: mesh.dim(),
            found: components.len(),
        });
    }
    let fields: Vec<Field> = components.iter().map(|c| c.realize(mesh)).collect();
    VectorField::from_components(&fields)
}

/// Nodal interpolant of `f = -div a(x,u,Du) + μu + div(h(u)E)` for a closed-form `u`.
///
/// Supported: separable polynomial `u`, constant or separable `E` components,
/// the regularized p-Laplacian, and matrix diffusion with a spatially constant matrix.
pub fn manufacture_rhs(
    mesh: Mesh,
    op: &OperatorSpec,
    h: &HSpec,
    e: &[Profile],
    mu: f64,
    u_exact: &Profile,
) -> Result<Field, DiscretizationError> {
    let dim = mesh.dim();
    if e.len() != dim {
        return Err(DiscretizationError::Components {
            expected: dim,
            found: e.len(),
        });
    }
    for node in mesh.boundary_nodes() {
        let v = u_exact.value(&mesh.node_coords(node)[..dim]);
        if v.abs() > 1e-12 {
            return Err(DiscretizationError::Catalog(format!(
                "exact solution is {v} on the boundary, expected 0"
            )));
        }
    }
    let constant_matrix = match &op.kind {
        OperatorKind::MatrixDiffusion { matrices } => {
            let first = &matrices[..dim * dim];
            if matrices.chunks(dim * dim).any(|m| m != first) {
                return Err(DiscretizationError::Catalog(
                    "matrix diffusion with a spatially varying matrix".into(),
                ));
            }
            Some(first.to_vec())
        }
        OperatorKind::PLaplacian { .. } => None,
    };

    Ok(Field::from_fn(mesh, |x| {
        let (u, g, hs) = u_exact.derivatives(x);
        let div_flux = match (&op.kind, &constant_matrix) {
            (OperatorKind::PLaplacian { p, epsilon }, _) => {
                let r2: f64 = g[..dim].iter().map(|v| v * v).sum::<f64>() + epsilon * epsilon;
                let lap: f64 = (0..dim).map(|i| hs[i][i]).sum();
                if *p == 2.0 {
                    lap
                } else {
                    let ghg: f64 = (0..dim)
                        .flat_map(|i| (0..dim).map(move |j| (i, j)))
                        .map(|(i, j)| g[i] * hs[i][j] * g[j])
                        .sum();
                    let w = r2.powf((p - 2.0) / 2.0);
                    // (p-2) r2^{(p-4)/2} gᵀHg, written so g = 0 gives 0 rather than 0·∞
                    let cross = if r2 > 0.0 { (p - 2.0) * w * ghg / r2 } else { 0.0 };
                    w * lap + cross
                }
            }
            (OperatorKind::MatrixDiffusion { .. }, Some(m)) => (0..dim)
                .flat_map(|i| (0..dim).map(move |j| (i, j)))
                .map(|(i, j)| m[i * dim + j] * hs[i][j])
                .sum(),
            (OperatorKind::MatrixDiffusion { .. }, None) => unreachable!(),
        };
        let mut e_dot_grad = 0.0;
        let mut div_e = 0.0;
        for (d, comp) in e.iter().enumerate() {
            e_dot_grad += comp.value(x) * g[d];
            div_e += comp.gradient(x)[d];
        }
        -div_flux + mu * u + h.eval_derivative(u) * e_dot_grad + h.eval(u) * div_e
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::build_mesh;

    fn bubble_1d() -> Profile {
        Profile::Separable(vec![Polynomial::bubble()])
    }

    #[test]
    fn polynomial_basics() {
        let p = Polynomial(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0), 9.0);
        assert_eq!(p.derivative(), Polynomial(vec![-2.0, 6.0]));
    }

    #[test]
    fn poisson_rhs() {
        let mesh = build_mesh(1, 8).unwrap();
        let op = OperatorSpec::p_laplacian(2.0, 0.0).unwrap();
        let f = manufacture_rhs(mesh, &op, &HSpec::Zero, &[Profile::Constant(0.0)], 0.0, &bubble_1d()).unwrap();
        assert!(f.values().iter().all(|&v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn convection_rhs_matches_product_rule() {
        let mesh = build_mesh(1, 8).unwrap();
        let op = OperatorSpec::p_laplacian(2.0, 0.0).unwrap();
        let f = manufacture_rhs(
            mesh,
            &op,
            &HSpec::Power { theta: 1.0 },
            &[Profile::Constant(1.0)],
            0.0,
            &bubble_1d(),
        )
        .unwrap();
        let oracle = Field::from_fn(mesh, |x| {
            let x = x[0];
            2.0 + 2.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
        });
        for (a, b) in f.values().iter().zip(oracle.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn mass_term_rhs() {
        let mesh = build_mesh(1, 8).unwrap();
        let op = OperatorSpec::p_laplacian(2.0, 0.0).unwrap();
        let f = manufacture_rhs(mesh, &op, &HSpec::Zero, &[Profile::Constant(0.0)], 1.0, &bubble_1d()).unwrap();
        let oracle = Field::from_fn(mesh, |x| 2.0 + x[0] * (1.0 - x[0]));
        for (a, b) in f.values().iter().zip(oracle.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn p_laplacian_rhs_against_one_dimensional_formula() {
        // -(|u'|^{p-2}u')' = -(p-1)|u'|^{p-2}u'' in 1D
        let mesh = build_mesh(1, 10).unwrap();
        let p = 3.0;
        let op = OperatorSpec::p_laplacian(p, 0.0).unwrap();
        let f = manufacture_rhs(mesh, &op, &HSpec::Zero, &[Profile::Constant(0.0)], 0.0, &bubble_1d()).unwrap();
        for node in 0..mesh.node_count() {
            let x = mesh.node_coords(node)[0];
            let du: f64 = 1.0 - 2.0 * x;
            let expected = -(p - 1.0) * du.abs().powf(p - 2.0) * (-2.0);
            assert!((f.values()[node] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn two_dimensional_with_variable_drift() {
        // u = x(1-x) y(1-y), E = (y, x), h(s) = s: div(uE) = E·Du since div E = 0
        let mesh = build_mesh(2, 4).unwrap();
        let op = OperatorSpec::p_laplacian(2.0, 0.0).unwrap();
        let u = Profile::Separable(vec![Polynomial::bubble(), Polynomial::bubble()]);
        let e = [
            Profile::Separable(vec![Polynomial(vec![1.0]), Polynomial(vec![0.0, 1.0])]),
            Profile::Separable(vec![Polynomial(vec![0.0, 1.0])]),
        ];
        let f = manufacture_rhs(mesh, &op, &HSpec::Linear, &e, 0.0, &u).unwrap();
        for node in 0..mesh.node_count() {
            let [x, y, _] = mesh.node_coords(node);
            let lap = -2.0 * y * (1.0 - y) - 2.0 * x * (1.0 - x);
            let ux = (1.0 - 2.0 * x) * y * (1.0 - y);
            let uy = x * (1.0 - x) * (1.0 - 2.0 * y);
            let expected = -lap + y * ux + x * uy;
            assert!((f.values()[node] - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_catalog_inputs() {
        let mesh = build_mesh(1, 4).unwrap();
        let op = OperatorSpec::p_laplacian(2.0, 0.0).unwrap();
        let not_zero = Profile::Separable(vec![Polynomial(vec![1.0, 1.0])]);
        assert!(matches!(
            manufacture_rhs(mesh, &op, &HSpec::Zero, &[Profile::Constant(0.0)], 0.0, &not_zero),
            Err(DiscretizationError::Catalog(_))
        ));
        let varying = OperatorSpec::matrix_diffusion(&mesh, |x| vec![1.0 + x[0]]).unwrap();
        assert!(matches!(
            manufacture_rhs(mesh, &varying, &HSpec::Zero, &[Profile::Constant(0.0)], 0.0, &bubble_1d()),
            Err(DiscretizationError::Catalog(_))
        ));
    }
}
