//! Stampacchia truncations `T_k(s) = max{-k, min{s, k}}` and `G_k(s) = s - T_k(s)`.

use thiserror::Error;

use crate::convection_profile::Convection;
use crate::discretization::{Field, VectorField};

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("truncation level must be finite and positive, got {0}")]
pub struct LevelError(pub f64);

/// A truncation level `k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TruncationLevel(f64);

impl TruncationLevel {
    pub fn new(k: f64) -> Result<Self, LevelError> {
        if k.is_finite() && k > 0.0 {
            Ok(Self(k))
        } else {
            Err(LevelError(k))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `T_k(s)`.
#[inline]
pub fn truncate(s: f64, k: f64) -> f64 {
    debug_assert!(k > 0.0);
    (-k).max(s.min(k))
}

/// `G_k(s) = s - T_k(s)`.
#[inline]
pub fn remainder(s: f64, k: f64) -> f64 {
    s - truncate(s, k)
}

/// Fields that can be clamped componentwise.
pub trait Truncate: Sized {
    fn truncated(&self, k: TruncationLevel) -> Self;
}

impl Truncate for Field {
    fn truncated(&self, k: TruncationLevel) -> Self {
        self.map(|v| truncate(v, k.get()))
    }
}

impl Truncate for VectorField {
    fn truncated(&self, k: TruncationLevel) -> Self {
        let mut out = self.clone();
        for v in out.values_mut() {
            *v = truncate(*v, k.get());
        }
        out
    }
}

pub fn truncate_field<F: Truncate>(field: &F, k: TruncationLevel) -> F {
    field.truncated(k)
}

/// `T_k ∘ h`, the convection nonlinearity of the truncated problems.
pub struct TruncatedConvection<'a> {
    pub inner: &'a dyn Convection,
    pub level: TruncationLevel,
}

impl Convection for TruncatedConvection<'_> {
    fn value(&self, s: f64) -> f64 {
        truncate(self.inner.value(s), self.level.get())
    }

    fn derivative(&self, s: f64) -> f64 {
        if self.inner.value(s).abs() < self.level.get() {
            self.inner.derivative(s)
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convection_profile::HSpec;
    use crate::discretization::build_mesh;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_examples() {
        assert_eq!(truncate(5.0, 2.0), 2.0);
        assert_eq!(truncate(-3.0, 2.0), -2.0);
        assert_eq!(truncate(1.5, 2.0), 1.5);
        assert_eq!(remainder(5.0, 2.0), 3.0);
        assert_eq!(remainder(1.5, 2.0), 0.0);
        assert_eq!(remainder(-5.0, 2.0), -3.0);
    }

    #[test]
    fn level_must_be_positive() {
        assert!(TruncationLevel::new(0.0).is_err());
        assert!(TruncationLevel::new(-1.0).is_err());
        assert!(TruncationLevel::new(f64::INFINITY).is_err());
        assert_eq!(TruncationLevel::new(2.5).unwrap().get(), 2.5);
    }

    #[test]
    fn field_examples() {
        let mesh = build_mesh(1, 2).unwrap();
        let k3 = TruncationLevel::new(3.0).unwrap();
        let zero = Field::zeros(mesh);
        assert_eq!(truncate_field(&zero, k3), zero);
        assert_eq!(truncate_field(&Field::constant(mesh, 7.0), k3), Field::constant(mesh, 3.0));
        let f = Field::from_values(mesh, vec![-4.0, 1.0, 9.0]).unwrap();
        let t = truncate_field(&f, TruncationLevel::new(2.0).unwrap());
        assert_eq!(t.values(), &[-2.0, 1.0, 2.0]);
        assert_eq!(t.mesh(), f.mesh());

        let mesh2 = build_mesh(2, 2).unwrap();
        let e = VectorField::constant(mesh2, &[5.0, -0.5]).unwrap();
        let te = truncate_field(&e, TruncationLevel::new(1.0).unwrap());
        assert!(te.values().chunks(2).all(|c| c == [1.0, -0.5]));
    }

    #[test]
    fn lipschitz_and_monotone_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100_000 {
            let k = rng.gen_range(1e-3..10.0);
            let a = rng.gen_range(-20.0..20.0);
            let b = rng.gen_range(-20.0..20.0);
            let (ta, tb) = (truncate(a, k), truncate(b, k));
            assert!((ta - tb).abs() <= (a - b).abs());
            if a <= b {
                assert!(ta <= tb);
            }
        }
    }

    #[test]
    fn truncated_convection_is_inactive_below_level() {
        let h = HSpec::Log;
        let t = TruncatedConvection {
            inner: &h,
            level: TruncationLevel::new(4.0).unwrap(),
        };
        for s in [-1.0, 0.0, 0.3, 1.2] {
            assert_eq!(t.value(s).to_bits(), h.eval(s).to_bits());
            assert_eq!(t.derivative(s).to_bits(), h.eval_derivative(s).to_bits());
        }
        assert_eq!(t.value(100.0), 4.0);
        assert_eq!(t.derivative(100.0), 0.0);
    }

    proptest! {
        // Dyadic samples: s - T_k(s) is representable, so the identity is bitwise.
        #[test]
        fn decomposition_is_bitwise_on_dyadic_grid(a in -(1i64 << 40)..(1i64 << 40), b in 1i64..(1i64 << 40)) {
            let s = a as f64 / (1u64 << 20) as f64;
            let k = b as f64 / (1u64 << 20) as f64;
            prop_assert_eq!((truncate(s, k) + remainder(s, k)).to_bits(), s.to_bits());
            prop_assert!(truncate(s, k).abs() <= k);
        }

        // For arbitrary doubles s - k can need one bit more than f64 has, so the
        // rounded remainder plus T_k(s) may land one ulp away from s.
        #[test]
        fn decomposition_within_one_ulp(s in -1e6f64..1e6, k in 1e-6f64..1e6) {
            let back = truncate(s, k) + remainder(s, k);
            let ulp = f64::EPSILON * s.abs();
            prop_assert!((back - s).abs() <= ulp);
            if s.abs() <= 2.0 * k {
                prop_assert_eq!(back.to_bits(), s.to_bits());
            }
        }

        #[test]
        fn remainder_magnitude(s in -1e3f64..1e3, k in 1e-3f64..1e3) {
            let expected = (s.abs() - k).max(0.0);
            prop_assert!((remainder(s, k).abs() - expected).abs() <= 1e-12 * s.abs().max(1.0));
        }
    }
}
