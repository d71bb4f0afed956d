//! Exponent bookkeeping: conjugates, Sobolev exponents, and the relation
//! `θ/s = (p-1)/N - 1/r` tying the data exponents together.
//!
//! Inputs that are short decimals (`1.2`, `6`, `2.5`) are promoted to exact
//! rationals, so derived values such as `s = 6` come out exact instead of
//! `5.999999999999998`. Anything else is carried in plain `f64`.

use num_rational::Ratio;
use num_traits::{Num, Signed};

use super::EstimateError;

type Q = Ratio<i128>;

const MAX_DENOMINATOR: i128 = 1_000_000;

trait Scalar: Copy + PartialOrd + Num + Signed {
    fn from_f64(x: f64) -> Self;
    fn from_usize(n: usize) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_usize(n: usize) -> Self {
        n as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for Q {
    fn from_f64(x: f64) -> Self {
        snap(x).expect("value was checked by snap")
    }
    fn from_usize(n: usize) -> Self {
        Q::from_integer(n as i128)
    }
    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// The rational with small denominator whose nearest double is `x`, if any.
fn snap(x: f64) -> Option<Q> {
    let q = Q::approximate_float(x)?;
    (q.denom().abs() <= MAX_DENOMINATOR && q.numer().abs() <= 1 << 60 && Scalar::to_f64(q) == x).then_some(q)
}

/// Exponents of one problem instance. `None` marks a quantity whose formula
/// degenerates; the reason is listed in `undefined`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentRecord {
    pub n: usize,
    pub p: f64,
    pub p_prime: f64,
    pub p_star: Option<f64>,
    pub p_star_prime: Option<f64>,
    pub m: Option<f64>,
    pub m_prime: Option<f64>,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub theta: Option<f64>,
    pub gamma: Option<f64>,
    pub undefined: Vec<(&'static str, String)>,
    /// True when every value was derived in exact rational arithmetic.
    pub exact: bool,
}

impl ExponentRecord {
    pub fn require(&self, name: &'static str) -> Result<f64, EstimateError> {
        let v = match name {
            "p*" => self.p_star,
            "(p*)'" => self.p_star_prime,
            "m" => self.m,
            "m'" => self.m_prime,
            "r" => self.r,
            "s" => self.s,
            "theta" => self.theta,
            "gamma" => self.gamma,
            "p" => Some(self.p),
            "p'" => Some(self.p_prime),
            _ => None,
        };
        v.ok_or_else(|| {
            let reason = self
                .undefined
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, r)| r.clone())
                .unwrap_or_else(|| "not supplied".into());
            EstimateError::Missing { name, reason }
        })
    }
}

/// `q* = qN/(N-q)`, defined for `q < N`.
pub fn sobolev_conjugate(q: f64, n: usize) -> Option<f64> {
    let nf = n as f64;
    (q < nf).then(|| q * nf / (nf - q))
}

/// `q' = q/(q-1)`, defined for `q > 1`.
pub fn holder_conjugate(q: f64) -> Option<f64> {
    (q > 1.0).then(|| q / (q - 1.0))
}

fn check_input(name: &'static str, v: Option<f64>) -> Result<(), EstimateError> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(EstimateError::Input(format!(
            "{name} must be finite and positive, got {x}"
        ))),
        _ => Ok(()),
    }
}

/// Derives every exponent from `p`, `N` and whichever of `m`, `r`, `θ` are given.
///
/// With `m` and `r` given, `θ` follows from `θ/s = (p-1)/N - 1/r`; with `m` and
/// `θ` given, `r` follows; with all three, they must satisfy the relation.
pub fn exponents(
    p: f64,
    n: usize,
    m: Option<f64>,
    r: Option<f64>,
    theta: Option<f64>,
) -> Result<ExponentRecord, EstimateError> {
    if !(p.is_finite() && p >= 2.0) {
        return Err(EstimateError::Input(format!("p must be at least 2, got {p}")));
    }
    if n == 0 {
        return Err(EstimateError::Input("dimension must be at least 1".into()));
    }
    check_input("m", m)?;
    check_input("r", r)?;
    check_input("theta", theta)?;
    let all_snap = [Some(p), m, r, theta].iter().flatten().all(|&x| snap(x).is_some());
    if all_snap {
        derive::<Q>(p, n, m, r, theta, true)
    } else {
        derive::<f64>(p, n, m, r, theta, false)
    }
}

fn close<T: Scalar>(a: T, b: T, exact: bool) -> bool {
    if exact {
        a == b
    } else {
        let (a, b) = (a.to_f64(), b.to_f64());
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }
}

fn derive<T: Scalar>(
    p: f64,
    n: usize,
    m: Option<f64>,
    r: Option<f64>,
    theta: Option<f64>,
    exact: bool,
) -> Result<ExponentRecord, EstimateError> {
    let one = T::one();
    let pp = T::from_f64(p);
    let nn = T::from_usize(n);
    let mm = m.map(T::from_f64);
    let rr = r.map(T::from_f64);
    let tt = theta.map(T::from_f64);
    let mut undefined = Vec::new();

    let p_prime = pp / (pp - one);
    let p_star = if nn > pp {
        Some(pp * nn / (nn - pp))
    } else {
        undefined.push(("p*", format!("N = {n} <= p = {p}")));
        undefined.push(("(p*)'", "p* undefined".to_string()));
        None
    };
    let p_star_prime = p_star.map(|q| q / (q - one));
    let m_prime = match mm {
        Some(mv) if mv > one => Some(mv / (mv - one)),
        Some(_) => {
            undefined.push(("m'", "m <= 1".to_string()));
            None
        }
        None => {
            undefined.push(("m'", "m not supplied".to_string()));
            None
        }
    };
    let s = match mm {
        Some(mv) if nn > mv * pp => Some(nn * mv / (nn - mv * pp)),
        Some(mv) => {
            undefined.push(("s", format!("N = {n} <= m p = {}", (mv * pp).to_f64())));
            None
        }
        None => {
            undefined.push(("s", "m not supplied".to_string()));
            None
        }
    };
    let base = (pp - one) / nn;
    let (theta_out, r_out) = match (s, tt, rr) {
        (Some(sv), Some(tv), Some(rv)) => {
            let lhs = tv / sv;
            let rhs = base - one / rv;
            if !close(lhs, rhs, exact) {
                return Err(EstimateError::Inconsistent(format!(
                    "theta/s = {} but (p-1)/N - 1/r = {}",
                    lhs.to_f64(),
                    rhs.to_f64()
                )));
            }
            (Some(tv), Some(rv))
        }
        (Some(sv), None, Some(rv)) => {
            let q = base - one / rv;
            if q > T::zero() {
                (Some(sv * q), Some(rv))
            } else {
                undefined.push(("theta", "(p-1)/N <= 1/r".to_string()));
                (None, Some(rv))
            }
        }
        (Some(sv), Some(tv), None) => {
            let inv_r = base - tv / sv;
            if inv_r > T::zero() {
                (Some(tv), Some(one / inv_r))
            } else {
                undefined.push(("r", "theta/s >= (p-1)/N".to_string()));
                (Some(tv), None)
            }
        }
        (_, tv, rv) => {
            if tv.is_none() {
                undefined.push(("theta", "needs s and r".to_string()));
            }
            if rv.is_none() {
                undefined.push(("r", "needs s and theta".to_string()));
            }
            (tv, rv)
        }
    };
    let gamma = match (s, p_star) {
        (Some(sv), Some(ps)) => Some(sv / ps),
        _ => {
            undefined.push(("gamma", "needs s and p*".to_string()));
            None
        }
    };
    let f = |v: Option<T>| v.map(Scalar::to_f64);
    Ok(ExponentRecord {
        n,
        p,
        p_prime: p_prime.to_f64(),
        p_star: f(p_star),
        p_star_prime: f(p_star_prime),
        m,
        m_prime: f(m_prime),
        r: f(r_out),
        s: f(s),
        theta: f(theta_out),
        gamma: f(gamma),
        undefined,
        exact,
    })
}

/// `(θ/𝒮)(αp*/(𝒮s(θ+1)))^{1+1/θ}`: the largest admissible `‖f‖_m ‖E‖_r^{1/θ}`.
pub fn smallness_threshold(rec: &ExponentRecord, alpha: f64, sobolev: f64) -> Result<f64, EstimateError> {
    if !(alpha > 0.0 && alpha.is_finite() && sobolev > 0.0 && sobolev.is_finite()) {
        return Err(EstimateError::Input(format!(
            "alpha and the Sobolev constant must be positive, got {alpha} and {sobolev}"
        )));
    }
    let theta = rec.require("theta")?;
    let s = rec.require("s")?;
    let p_star = rec.require("p*")?;
    let base = alpha * p_star / (sobolev * s * (theta + 1.0));
    Ok(theta / sobolev * base.powf(1.0 + 1.0 / theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_dimensional_quadratic_case() {
        let rec = exponents(2.0, 3, None, None, None).unwrap();
        assert_eq!(rec.p_prime, 2.0);
        assert_eq!(rec.p_star, Some(6.0));
        assert_eq!(rec.p_star_prime, Some(1.2));

        let rec = exponents(2.0, 3, Some(1.2), None, None).unwrap();
        assert_eq!(rec.s, Some(6.0));

        let rec = exponents(2.0, 3, Some(1.2), Some(6.0), None).unwrap();
        assert!(rec.exact);
        assert_eq!(rec.theta, Some(1.0));
        assert_eq!(rec.gamma, Some(1.0));
    }

    #[test]
    fn degenerate_formulas_are_flagged() {
        let rec = exponents(3.0, 2, Some(1.0), None, None).unwrap();
        assert_eq!(rec.p_star, None);
        assert_eq!(rec.s, None);
        assert!(matches!(rec.require("s"), Err(EstimateError::Missing { name: "s", .. })));
        assert!(exponents(1.5, 3, None, None, None).is_err());
        assert!(exponents(2.0, 3, Some(-1.0), None, None).is_err());
    }

    #[test]
    fn relation_fills_in_r_and_rejects_inconsistency() {
        let rec = exponents(2.0, 3, Some(1.2), None, Some(1.0)).unwrap();
        assert_eq!(rec.r, Some(6.0));
        assert!(matches!(
            exponents(2.0, 3, Some(1.2), Some(6.0), Some(2.0)),
            Err(EstimateError::Inconsistent(_))
        ));
        // irrational inputs take the floating path
        let rec = exponents(2.0, 3, Some(1.2), Some(2.0f64.sqrt() * 4.0), None).unwrap();
        assert!(!rec.exact);
        assert!(rec.theta.unwrap() > 0.0);
    }

    #[test]
    fn threshold_examples() {
        let rec = exponents(2.0, 3, Some(1.2), Some(6.0), None).unwrap();
        assert_eq!(smallness_threshold(&rec, 1.0, 1.0).unwrap(), 0.25);
        assert_eq!(smallness_threshold(&rec, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(smallness_threshold(&rec, 1.0, 2.0).unwrap(), 0.03125);
        let partial = exponents(2.0, 3, Some(1.2), None, None).unwrap();
        assert!(matches!(
            smallness_threshold(&partial, 1.0, 1.0),
            Err(EstimateError::Missing { name: "theta", .. })
        ));
    }

    proptest! {
        #[test]
        fn conjugate_relations(p in 2.0f64..6.0, n in 1usize..8, m in 1.01f64..4.0) {
            let rec = exponents(p, n, Some(m), None, None).unwrap();
            prop_assert!((1.0 / rec.p + 1.0 / rec.p_prime - 1.0).abs() < 1e-14);
            let mp = rec.m_prime.unwrap();
            prop_assert!((1.0 / m + 1.0 / mp - 1.0).abs() < 1e-14);
            if let Some(psp) = rec.p_star_prime {
                // ((p*)')* = p'
                let back = sobolev_conjugate(psp, n).unwrap();
                prop_assert!((back - rec.p_prime).abs() < 1e-10 * back);
            }
            if let Some(s) = rec.s {
                // s is m starred p times: 1/s = 1/m - p/N
                prop_assert!((1.0 / s - (1.0 / m - p / n as f64)).abs() < 1e-12);
            }
        }

        #[test]
        fn threshold_monotone_in_constants(
            a1 in 0.1f64..10.0, a2 in 0.1f64..10.0, s1 in 0.1f64..10.0, s2 in 0.1f64..10.0,
            r in 3.5f64..40.0,
        ) {
            let rec = exponents(2.0, 3, Some(1.2), Some(r), None).unwrap();
            let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
            if lo < hi {
                prop_assert!(smallness_threshold(&rec, lo, 1.0).unwrap() < smallness_threshold(&rec, hi, 1.0).unwrap());
            }
            let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
            if lo < hi {
                prop_assert!(smallness_threshold(&rec, 1.0, lo).unwrap() > smallness_threshold(&rec, 1.0, hi).unwrap());
            }
        }
    }
}
