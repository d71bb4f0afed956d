//! Scenario configuration (TOML) and its translation into a problem instance.
//!
//! ```toml
//! [problem]
//! dimension = 1
//! cells = 64
//! p = 2.0
//! mu = 0.0
//! h = { family = "power", theta = 1.0 }
//! e = { kind = "constant", value = [1.0] }
//! f = { kind = "constant", value = 2.0 }
//!
//! [exponents]
//! m = 1.2
//! r = 6.0
//!
//! [solver]
//! tol = 1e-10
//! max_iter = 200
//!
//! [scenario]
//! levels = [1.0, 2.0, 4.0]
//! seeds = 5
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use quasilin_core::discretization::io::{read_field_csv, read_vector_field_csv};
use quasilin_core::discretization::{
    build_mesh, default_epsilon, manufacture_rhs, realize_vector, OperatorSpec, Polynomial, Profile,
};
use quasilin_core::estimates::{exponents, ExponentRecord};
use quasilin_core::{Field, HSpec, Mesh, VectorField};

use crate::CliError;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub problem: ProblemConfig,
    pub exponents: Option<ExponentsConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub scenario: ScenarioOptions,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "one")]
    pub dimension: usize,
    #[serde(default = "sixteen")]
    pub cells: usize,
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default)]
    pub mu: f64,
    /// Regularization of the p-Laplacian; defaults to `1e-8·√N·n` for `p > 2`.
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub operator: OperatorConfig,
    #[serde(default)]
    pub h: HConfig,
    #[serde(default)]
    pub e: VectorDescriptor,
    #[serde(default)]
    pub f: ScalarDescriptor,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            dimension: 1,
            cells: 16,
            p: 2.0,
            mu: 0.0,
            epsilon: None,
            operator: OperatorConfig::default(),
            h: HConfig::default(),
            e: VectorDescriptor::default(),
            f: ScalarDescriptor::default(),
        }
    }
}

fn one() -> usize {
    1
}
fn sixteen() -> usize {
    16
}
fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorConfig {
    #[default]
    PLaplacian,
    /// `a = M ξ` with a constant symmetric positive-definite `M` (row-major); needs `p = 2`.
    Matrix { matrix: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HConfig {
    Power {
        theta: f64,
    },
    /// `s|s|^{p-2+θ}` with the problem's `p`.
    PowerMu {
        theta: f64,
    },
    Log,
    Linear,
    #[default]
    Zero,
}

impl HConfig {
    pub fn to_spec(&self, p: f64) -> HSpec {
        match *self {
            HConfig::Power { theta } => HSpec::Power { theta },
            HConfig::PowerMu { theta } => HSpec::PowerMu { p, theta },
            HConfig::Log => HSpec::Log,
            HConfig::Linear => HSpec::Linear,
            HConfig::Zero => HSpec::Zero,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarDescriptor {
    Constant {
        value: f64,
    },
    /// `Π_d P_d(x_d)`, coefficients in ascending order per axis.
    Polynomial {
        factors: Vec<Vec<f64>>,
    },
    Csv {
        path: PathBuf,
    },
    /// Right-hand side manufactured from the separable exact solution.
    Manufactured {
        exact: Vec<Vec<f64>>,
    },
}

impl Default for ScalarDescriptor {
    fn default() -> Self {
        ScalarDescriptor::Constant { value: 0.0 }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VectorDescriptor {
    Constant {
        value: Vec<f64>,
    },
    /// One separable polynomial per component.
    Polynomial {
        components: Vec<Vec<Vec<f64>>>,
    },
    Csv {
        path: PathBuf,
    },
}

impl Default for VectorDescriptor {
    fn default() -> Self {
        VectorDescriptor::Constant { value: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub m: Option<f64>,
    pub r: Option<f64>,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    200
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOptions {
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_amplitude")]
    pub seed_amplitude: f64,
    /// Initial iterate for `fixed-point`; zero when absent.
    pub v0: Option<ScalarDescriptor>,
    #[serde(default = "default_fp_iters")]
    pub max_iters: usize,
    #[serde(default = "default_fp_tol")]
    pub fixed_point_tol: f64,
    /// Coercivity constant; taken from the operator when absent.
    pub alpha: Option<f64>,
    /// Sobolev constant; estimated on the mesh when absent.
    pub sobolev: Option<f64>,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self {
            levels: default_levels(),
            seeds: default_seeds(),
            seed: 0,
            seed_amplitude: default_amplitude(),
            v0: None,
            max_iters: default_fp_iters(),
            fixed_point_tol: default_fp_tol(),
            alpha: None,
            sobolev: None,
        }
    }
}

fn default_levels() -> Vec<f64> {
    (0..9).map(|k| f64::from(1u32 << k)).collect()
}
fn default_seeds() -> usize {
    5
}
fn default_amplitude() -> f64 {
    1.0
}
fn default_fp_iters() -> usize {
    50
}
fn default_fp_tol() -> f64 {
    1e-8
}

/// Parses a configuration file; CSV paths inside it resolve against its directory.
pub fn load_config(path: &Path) -> Result<(ScenarioConfig, PathBuf), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg = parse_config(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn polynomial_profile(factors: &[Vec<f64>], dim: usize, what: &str) -> Result<Profile, CliError> {
    if factors.len() > dim {
        return Err(invalid(format!("{what}: {} factors for dimension {dim}", factors.len())));
    }
    if factors.iter().flatten().any(|c| !c.is_finite()) {
        return Err(invalid(format!("{what}: non-finite coefficient")));
    }
    Ok(Profile::Separable(factors.iter().map(|c| Polynomial(c.clone())).collect()))
}

impl VectorDescriptor {
    fn profiles(&self, dim: usize) -> Result<Option<Vec<Profile>>, CliError> {
        match self {
            VectorDescriptor::Constant { value } if value.is_empty() => Ok(Some(vec![Profile::Constant(0.0); dim])),
            VectorDescriptor::Constant { value } => {
                if value.len() != dim {
                    return Err(invalid(format!("E has {} components, dimension is {dim}", value.len())));
                }
                Ok(Some(value.iter().map(|&v| Profile::Constant(v)).collect()))
            }
            VectorDescriptor::Polynomial { components } => {
                if components.len() != dim {
                    return Err(invalid(format!("E has {} components, dimension is {dim}", components.len())));
                }
                components
                    .iter()
                    .map(|c| polynomial_profile(c, dim, "E"))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Some)
            }
            VectorDescriptor::Csv { .. } => Ok(None),
        }
    }

    fn realize(&self, mesh: Mesh, base: &Path) -> Result<VectorField, CliError> {
        match self.profiles(mesh.dim())? {
            Some(p) => realize_vector(mesh, &p).map_err(|e| invalid(format!("E: {e}"))),
            None => {
                let VectorDescriptor::Csv { path } = self else { unreachable!() };
                let full = base.join(path);
                let file = std::fs::File::open(&full).map_err(|e| invalid(format!("E: {}: {e}", full.display())))?;
                let field = read_vector_field_csv(file, mesh.dim()).map_err(|e| invalid(format!("E: {e}")))?;
                if field.mesh() != &mesh {
                    return Err(invalid(format!("E: {} is tabulated on a different grid", full.display())));
                }
                Ok(field)
            }
        }
    }
}

impl ScalarDescriptor {
    pub(crate) fn realize_plain(&self, mesh: Mesh, base: &Path, what: &str) -> Result<Field, CliError> {
        match self {
            ScalarDescriptor::Constant { value } => Ok(Field::constant(mesh, *value)),
            ScalarDescriptor::Polynomial { factors } => Ok(polynomial_profile(factors, mesh.dim(), what)?.realize(mesh)),
            ScalarDescriptor::Csv { path } => {
                let full = base.join(path);
                let file = std::fs::File::open(&full).map_err(|e| invalid(format!("{what}: {}: {e}", full.display())))?;
                let field = read_field_csv(file, mesh.dim()).map_err(|e| invalid(format!("{what}: {e}")))?;
                if field.mesh() != &mesh {
                    return Err(invalid(format!("{what}: {} is tabulated on a different grid", full.display())));
                }
                Ok(field)
            }
            ScalarDescriptor::Manufactured { .. } => Err(invalid(format!("{what}: manufactured data is only available for f"))),
        }
    }
}

/// Everything a run needs, realized on the mesh and checked.
#[derive(Debug, Clone)]
pub struct Realized {
    pub problem: quasilin_core::solver::ProblemSpec,
    /// Exact solution when `f` was manufactured.
    pub exact: Option<Field>,
}

impl ScenarioConfig {
    pub fn mesh(&self) -> Result<Mesh, CliError> {
        build_mesh(self.problem.dimension, self.problem.cells).map_err(|e| invalid(e.to_string()))
    }

    pub fn exponent_record(&self) -> Result<Option<ExponentRecord>, CliError> {
        match &self.exponents {
            None => Ok(None),
            Some(x) => exponents(self.problem.p, self.problem.dimension, x.m, x.r, x.theta)
                .map(Some)
                .map_err(|e| invalid(e.to_string())),
        }
    }

    pub fn operator(&self, mesh: &Mesh) -> Result<OperatorSpec, CliError> {
        let pc = &self.problem;
        match &pc.operator {
            OperatorConfig::PLaplacian => {
                let eps = match pc.epsilon {
                    Some(e) => e,
                    None if pc.p > 2.0 => default_epsilon(mesh),
                    None => 0.0,
                };
                OperatorSpec::p_laplacian(pc.p, eps).map_err(|e| invalid(e.to_string()))
            }
            OperatorConfig::Matrix { matrix } => {
                if pc.p != 2.0 {
                    return Err(invalid("matrix diffusion needs p = 2"));
                }
                let dim = pc.dimension;
                if matrix.len() != dim || matrix.iter().any(|row| row.len() != dim) {
                    return Err(invalid(format!("diffusion matrix must be {dim}x{dim}")));
                }
                let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
                OperatorSpec::matrix_diffusion(mesh, |_| flat.clone()).map_err(|e| invalid(e.to_string()))
            }
        }
    }

    /// Builds the problem; every check that does not need a solve happens here.
    pub fn realize(&self, base: &Path) -> Result<Realized, CliError> {
        let pc = &self.problem;
        if !(pc.p.is_finite() && pc.p >= 2.0) {
            return Err(invalid(format!("p must be at least 2, got {}", pc.p)));
        }
        if !(pc.mu.is_finite() && pc.mu >= 0.0) {
            return Err(invalid(format!("mu must be non-negative, got {}", pc.mu)));
        }
        let mesh = self.mesh()?;
        let op = self.operator(&mesh)?;
        let h = self.problem.h.to_spec(pc.p);
        let e = pc.e.realize(mesh, base)?;
        let (f, exact) = match &pc.f {
            ScalarDescriptor::Manufactured { exact } => {
                let u = polynomial_profile(exact, mesh.dim(), "exact solution")?;
                let e_prof = pc
                    .e
                    .profiles(mesh.dim())?
                    .ok_or_else(|| invalid("manufactured f needs E given by constants or polynomials"))?;
                let f = manufacture_rhs(mesh, &op, &h, &e_prof, pc.mu, &u).map_err(|e| invalid(e.to_string()))?;
                (f, Some(u.realize(mesh)))
            }
            other => (other.realize_plain(mesh, base, "f")?, None),
        };
        let mut problem =
            quasilin_core::solver::ProblemSpec::new(op, h, e, f, pc.mu).map_err(|e| invalid(e.to_string()))?;
        if let Some(rec) = self.exponent_record()? {
            problem = problem.with_exponents(rec).map_err(|e| invalid(e.to_string()))?;
        }
        Ok(Realized { problem, exact })
    }
}
