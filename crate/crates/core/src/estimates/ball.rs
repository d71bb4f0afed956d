//! The invariant ball of the frozen-coefficient map and its scalar majorant.

use super::{EstimateError, ExponentRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallParams {
    pub a: f64,
    pub b: f64,
    pub theta: f64,
    /// `R = (1/(b(θ+1)))^{1/θ}`, the minimizer of `a + b x^{1+θ} - x`.
    pub radius: f64,
    /// `a ≤ Rθ/(θ+1)`: the ball of radius `R` is mapped into itself.
    pub invariant: bool,
    /// `a + b R^{1+θ}`.
    pub image_of_radius: f64,
}

pub fn invariant_ball(a: f64, b: f64, theta: f64) -> Result<BallParams, EstimateError> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(EstimateError::Input(format!("b must be positive, got {b}")));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(EstimateError::Input(format!("theta must be positive, got {theta}")));
    }
    if !(a >= 0.0 && a.is_finite()) {
        return Err(EstimateError::Input(format!("a must be non-negative, got {a}")));
    }
    let radius = (1.0 / (b * (theta + 1.0))).powf(1.0 / theta);
    let invariant = a <= radius * theta / (theta + 1.0);
    let image_of_radius = a + b * radius.powf(1.0 + theta);
    debug_assert!(!invariant || image_of_radius <= radius * (1.0 + 8.0 * f64::EPSILON));
    Ok(BallParams {
        a,
        b,
        theta,
        radius,
        invariant,
        image_of_radius,
    })
}

/// `a = 𝒮²s‖f‖_m/(αp*)` and `b = 𝒮s‖E‖_r/(p*α)` from measured data norms.
pub fn ball_from_data(
    rec: &ExponentRecord,
    alpha: f64,
    sobolev: f64,
    f_m: f64,
    e_r: f64,
) -> Result<BallParams, EstimateError> {
    let s = rec.require("s")?;
    let p_star = rec.require("p*")?;
    let theta = rec.require("theta")?;
    let a = sobolev * sobolev * s * f_m / (alpha * p_star);
    let b = sobolev * s * e_r / (p_star * alpha);
    invariant_ball(a, b, theta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MajorantTrace {
    /// `x_0, x_1, …`; ends early once an iterate repeats exactly or overflows.
    pub values: Vec<f64>,
    pub diverged: bool,
    /// The last value is an exact floating-point fixed point of the recursion.
    pub stationary: bool,
}

impl MajorantTrace {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("trace holds x0")
    }
}

/// `x_{k+1} = a + b x_k^{1+θ}` for up to `iters` steps.
pub fn majorant_recursion(a: f64, b: f64, theta: f64, x0: f64, iters: usize) -> Result<MajorantTrace, EstimateError> {
    for (name, v) in [("a", a), ("b", b), ("theta", theta), ("x0", x0)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(EstimateError::Input(format!("{name} must be finite and non-negative, got {v}")));
        }
    }
    let mut values = vec![x0];
    let mut x = x0;
    for _ in 0..iters {
        let next = a + b * x.powf(1.0 + theta);
        if !next.is_finite() || next > 1e300 {
            return Ok(MajorantTrace {
                values,
                diverged: true,
                stationary: false,
            });
        }
        if next == x {
            return Ok(MajorantTrace {
                values,
                diverged: false,
                stationary: true,
            });
        }
        values.push(next);
        x = next;
    }
    Ok(MajorantTrace {
        values,
        diverged: false,
        stationary: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ball_examples() {
        let ball = invariant_ball(0.2, 1.0, 1.0).unwrap();
        assert_eq!(ball.radius, 0.5);
        assert!(ball.invariant);
        assert!(invariant_ball(0.0, 3.0, 0.7).unwrap().invariant);
        assert!(!invariant_ball(0.3, 1.0, 1.0).unwrap().invariant);
        assert!(invariant_ball(0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn recursion_examples() {
        let t = majorant_recursion(0.2, 1.0, 1.0, 0.0, 10_000).unwrap();
        assert!(!t.diverged);
        assert!((t.last() - (1.0 - 0.2f64.sqrt()) / 2.0).abs() < 1e-12);

        let t = majorant_recursion(0.0, 2.0, 1.5, 0.0, 100).unwrap();
        assert!(t.stationary && t.values == vec![0.0]);

        let t = majorant_recursion(0.3, 1.0, 1.0, 0.0, 10_000).unwrap();
        assert!(t.diverged);
        assert!(t.last() > 1e100);
    }

    proptest! {
        #[test]
        fn iterates_stay_in_ball_and_increase(theta in 0.2f64..4.0, b in 0.1f64..10.0, u in 0.0f64..1.0, x0_frac in 0.0f64..1.0) {
            let r = (1.0 / (b * (theta + 1.0))).powf(1.0 / theta);
            let a = u * r * theta / (theta + 1.0);
            let ball = invariant_ball(a, b, theta).unwrap();
            prop_assert!(ball.invariant);
            prop_assert!(ball.image_of_radius <= ball.radius);
            let t = majorant_recursion(a, b, theta, x0_frac * a, 2000).unwrap();
            prop_assert!(t.values.iter().all(|&x| x <= ball.radius));
            // x0 ≤ a ≤ least fixed point, so the trace is non-decreasing
            prop_assert!(t.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
