//! Convection nonlinearities `h` and the integral profiles
//!
//! ```text
//! R(k) = ∫_0^k ds / (|h(s)| + 1)^{p'}        S(t) = ∫_0^t ds / (|h(s)| + 1)^{p'/p}
//! ```
//!
//! Whether `S` is bounded at infinity decides which existence regime applies:
//! a divergent `S` gives bounded solutions for bounded data, a bounded `S`
//! (horizontal asymptote) needs the smallness threshold in
//! [`crate::estimates::smallness_threshold`].

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::quadrature::{integrate_from_origin, QuadratureOptions};

/// Anything that can play the role of `h` in the convection term `h(u) E`.
pub trait Convection: Send + Sync {
    fn value(&self, s: f64) -> f64;
    fn derivative(&self, s: f64) -> f64;
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied `h` and `h'`.
#[derive(Clone)]
pub struct CustomH {
    pub name: String,
    value: ScalarFn,
    derivative: ScalarFn,
}

impl CustomH {
    pub fn new<F, G>(name: impl Into<String>, value: F, derivative: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }
}

impl fmt::Debug for CustomH {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomH").field("name", &self.name).finish()
    }
}

/// The convection nonlinearity.
///
/// Power families use the odd extension, `h(-s) = -h(s)`.
#[derive(Debug, Clone)]
pub enum HSpec {
    /// `h(s) = s |s|^θ`
    Power { theta: f64 },
    /// `h(s) = s |s|^{p-2+θ}`, the lower-order-term family.
    PowerMu { p: f64, theta: f64 },
    /// `h(s) = s log(e + |s|)`
    Log,
    /// `h(s) = s`; not superlinear, kept for testing.
    Linear,
    /// `h ≡ 0`; not superlinear, kept for testing.
    Zero,
    Custom(CustomH),
}

impl HSpec {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            HSpec::Power { theta } => s * s.abs().powf(*theta),
            HSpec::PowerMu { p, theta } => s * s.abs().powf(p - 2.0 + theta),
            HSpec::Log => s * (std::f64::consts::E + s.abs()).ln(),
            HSpec::Linear => s,
            HSpec::Zero => 0.0,
            HSpec::Custom(c) => (c.value)(s),
        }
    }

    pub fn eval_derivative(&self, s: f64) -> f64 {
        match self {
            HSpec::Power { theta } => (1.0 + theta) * s.abs().powf(*theta),
            HSpec::PowerMu { p, theta } => {
                let e = p - 2.0 + theta;
                (1.0 + e) * s.abs().powf(e)
            }
            HSpec::Log => {
                let a = std::f64::consts::E + s.abs();
                a.ln() + s.abs() / a
            }
            HSpec::Linear => 1.0,
            HSpec::Zero => 0.0,
            HSpec::Custom(c) => (c.derivative)(s),
        }
    }

    /// False for the families that violate superlinear growth (`Zero`, `Linear`).
    /// Custom functions are assumed conforming.
    pub fn is_superlinear(&self) -> bool {
        match self {
            HSpec::Power { theta } => *theta > 0.0,
            HSpec::PowerMu { p, theta } => p - 2.0 + theta > 0.0,
            HSpec::Log | HSpec::Custom(_) => true,
            HSpec::Linear | HSpec::Zero => false,
        }
    }

    pub fn family_name(&self) -> &str {
        match self {
            HSpec::Power { .. } => "power",
            HSpec::PowerMu { .. } => "power-mu",
            HSpec::Log => "log",
            HSpec::Linear => "linear",
            HSpec::Zero => "zero",
            HSpec::Custom(c) => &c.name,
        }
    }
}

impl Convection for HSpec {
    fn value(&self, s: f64) -> f64 {
        self.eval(s)
    }
    fn derivative(&self, s: f64) -> f64 {
        self.eval_derivative(s)
    }
}

/// `h(s)` for the given family.
pub fn eval_h(h: &HSpec, s: f64) -> f64 {
    h.eval(s)
}

/// `h'(s)` for the given family.
pub fn eval_dh(h: &HSpec, s: f64) -> f64 {
    h.eval_derivative(s)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("exponent p = {0} is outside the supported range p >= 2")]
    Exponent(f64),
    #[error("profile argument must be finite and non-negative, got {0}")]
    Argument(f64),
    #[error("adaptive quadrature did not reach {tol:e} on [0, {upper}] (estimate {estimate:e})")]
    Quadrature { upper: f64, tol: f64, estimate: f64 },
    #[error("tail test for `{name}` is inconclusive: increment ratios {ratios:?}")]
    Indeterminate { name: String, ratios: Vec<f64> },
}

fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

fn check_p(p: f64) -> Result<(), ProfileError> {
    if p.is_finite() && p >= 2.0 {
        Ok(())
    } else {
        Err(ProfileError::Exponent(p))
    }
}

fn profile_integral(h: &HSpec, power: f64, upper: f64) -> Result<f64, ProfileError> {
    let opts = QuadratureOptions::default();
    let r = if upper >= 0.0 {
        integrate_from_origin(|s| (h.eval(s).abs() + 1.0).powf(-power), upper, &opts)
    } else {
        // ∫_0^t = -∫_t^0; substitute s -> -s to integrate from the origin again
        let mut r = integrate_from_origin(|s| (h.eval(-s).abs() + 1.0).powf(-power), -upper, &opts);
        r.value = -r.value;
        r
    };
    if !r.converged {
        return Err(ProfileError::Quadrature {
            upper,
            tol: opts.abs_tol,
            estimate: r.error_estimate,
        });
    }
    Ok(r.value)
}

/// `R(k) = ∫_0^k (|h(s)| + 1)^{-p'} ds`.
pub fn compute_r(h: &HSpec, p: f64, k: f64) -> Result<f64, ProfileError> {
    check_p(p)?;
    if !(k.is_finite() && k >= 0.0) {
        return Err(ProfileError::Argument(k));
    }
    profile_integral(h, conjugate(p), k)
}

/// `S(t) = ∫_0^t (|h(s)| + 1)^{-p'/p} ds`, signed in `t`.
pub fn compute_s(h: &HSpec, p: f64, t: f64) -> Result<f64, ProfileError> {
    check_p(p)?;
    if !t.is_finite() {
        return Err(ProfileError::Argument(t));
    }
    profile_integral(h, conjugate(p) / p, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthKind {
    /// `S` has a horizontal asymptote near `asymptote`.
    Bounded { asymptote: f64 },
    /// `|S(t)| -> ∞`.
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassificationMethod {
    ClosedForm,
    NumericTail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthClass {
    pub kind: GrowthKind,
    pub method: ClassificationMethod,
}

impl GrowthClass {
    pub fn is_divergent(&self) -> bool {
        matches!(self.kind, GrowthKind::Divergent)
    }
}

impl fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GrowthKind::Bounded { asymptote } => write!(f, "Bounded (asymptote ~ {asymptote:.6})"),
            GrowthKind::Divergent => write!(f, "Divergent"),
        }
    }
}

const TAIL_START: f64 = 1e3;
const TAIL_DOUBLINGS: i32 = 10;

/// Power-law families: the `S` integrand decays like `s^{-κ}` with `κ = (1 + e)/(p - 1)`
/// where `|h(s)| ~ |s|^{1+e}`, so `S` is bounded iff `κ > 1`.
fn classify_power_law(h: &HSpec, p: f64, growth_exponent: f64) -> Result<GrowthClass, ProfileError> {
    let kappa = (1.0 + growth_exponent) / (p - 1.0);
    let kind = if kappa > 1.0 {
        // S(T) plus the analytic tail of s^{-κ}
        let head = compute_s(h, p, TAIL_START)?;
        let tail = TAIL_START.powf(1.0 - kappa) / (kappa - 1.0);
        GrowthKind::Bounded {
            asymptote: head + tail,
        }
    } else {
        GrowthKind::Divergent
    };
    Ok(GrowthClass {
        kind,
        method: ClassificationMethod::ClosedForm,
    })
}

fn classify_numeric(h: &HSpec, p: f64, name: &str) -> Result<GrowthClass, ProfileError> {
    let mut values = Vec::with_capacity(TAIL_DOUBLINGS as usize + 1);
    for k in 0..=TAIL_DOUBLINGS {
        values.push(compute_s(h, p, TAIL_START * 2f64.powi(k))?);
    }
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let ratios: Vec<f64> = increments
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let shrinking = ratios.iter().filter(|&&r| r < 0.5).count();
    if shrinking == ratios.len() {
        let last = *increments.last().unwrap_or(&0.0);
        let rho = *ratios.last().unwrap_or(&0.0);
        let asymptote = values[values.len() - 1] + last * rho / (1.0 - rho);
        Ok(GrowthClass {
            kind: GrowthKind::Bounded { asymptote },
            method: ClassificationMethod::NumericTail,
        })
    } else if shrinking == 0 {
        Ok(GrowthClass {
            kind: GrowthKind::Divergent,
            method: ClassificationMethod::NumericTail,
        })
    } else {
        Err(ProfileError::Indeterminate {
            name: name.to_string(),
            ratios,
        })
    }
}

/// Decides whether `|S(t)| -> ∞`.
///
/// Known families use the closed-form rule; `Custom` uses the doubling test:
/// with `T = 10^3`, bounded when every increment ratio
/// `[S(2^{k+1}T) - S(2^k T)] / [S(2^k T) - S(2^{k-1}T)]` over ten doublings
/// is below 1/2, divergent when none is, indeterminate otherwise.
pub fn classify_growth(h: &HSpec, p: f64) -> Result<GrowthClass, ProfileError> {
    check_p(p)?;
    match h {
        HSpec::Power { theta } => classify_power_law(h, p, *theta),
        HSpec::PowerMu { p: ph, theta } => classify_power_law(h, p, ph - 2.0 + theta),
        HSpec::Log | HSpec::Linear | HSpec::Zero => Ok(GrowthClass {
            kind: GrowthKind::Divergent,
            method: ClassificationMethod::ClosedForm,
        }),
        HSpec::Custom(c) => classify_numeric(h, p, &c.name),
    }
}
