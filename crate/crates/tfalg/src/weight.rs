//! Submultiplicative radial weights v on the time-frequency plane.
//!
//! A weight here is radial, v(λ) = w(‖λ‖) with w nondecreasing, normalized
//! so v(0) = 1, and submultiplicative: v(x + y) ≤ v(x)·v(y). The admissible
//! ones additionally satisfy the GRS condition w(nr)^{1/n} → 1; the
//! exponential family is submultiplicative but *not* admissible, which is
//! exactly what makes it useful for exhibiting where spectral invariance
//! breaks down.

use num_traits::Float;

use crate::point::TfPoint;
use crate::scalar::Scalar;

/// Weight families.
///
/// * `Constant` — v ≡ 1 (the unweighted ℓ¹ algebra).
/// * `Polynomial { s }` — v(λ) = (1 + ‖λ‖)^s, s ≥ 0.
/// * `Subexponential { alpha, beta }` — v(λ) = e^{α‖λ‖^β}, α ≥ 0, 0 < β < 1.
/// * `Exponential { alpha }` — v(λ) = e^{α‖λ‖}, α > 0. Not admissible.
#[derive(Clone, Debug, PartialEq)]
pub enum Weight<T: Scalar> {
    Constant,
    Polynomial { s: T },
    Subexponential { alpha: T, beta: T },
    Exponential { alpha: T },
}

impl<T: Scalar> Weight<T> {
    pub fn polynomial(s: T) -> Self {
        assert!(s >= T::zero(), "polynomial exponent must be >= 0");
        Weight::Polynomial { s }
    }

    pub fn subexponential(alpha: T, beta: T) -> Self {
        assert!(alpha >= T::zero(), "subexponential alpha must be >= 0");
        assert!(
            beta > T::zero() && beta < T::one(),
            "subexponential beta must lie in (0, 1)"
        );
        Weight::Subexponential { alpha, beta }
    }

    pub fn exponential(alpha: T) -> Self {
        assert!(alpha > T::zero(), "exponential alpha must be > 0");
        Weight::Exponential { alpha }
    }

    /// Radial profile w(r) = v at radius r ≥ 0.
    pub fn radial(&self, r: T) -> T {
        debug_assert!(r >= T::zero());
        match *self {
            Weight::Constant => T::one(),
            Weight::Polynomial { s } => Float::powf(T::one() + r, s),
            Weight::Subexponential { alpha, beta } => Float::exp(alpha * Float::powf(r, beta)),
            Weight::Exponential { alpha } => Float::exp(alpha * r),
        }
    }

    /// v(λ) = w(‖λ‖).
    pub fn value(&self, point: &TfPoint<T>) -> T {
        self.radial(point.norm())
    }

    /// True for the families satisfying the GRS condition.
    pub fn admissible(&self) -> bool {
        !matches!(self, Weight::Exponential { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(t: f64, w: f64) -> TfPoint<f64> {
        TfPoint::new_1d(t, w).unwrap()
    }

    #[test]
    fn normalization_and_symmetry() {
        let weights = [
            Weight::Constant,
            Weight::polynomial(2.0),
            Weight::subexponential(0.7, 0.5),
            Weight::exponential(1.0),
        ];
        for v in &weights {
            assert_eq!(v.value(&TfPoint::zero(1)), 1.0);
            let p = point(1.5, -2.0);
            assert_eq!(v.value(&p), v.value(&p.negated()));
        }
    }

    #[test]
    fn polynomial_values() {
        let v = Weight::polynomial(1.0);
        assert_eq!(v.value(&point(1.0, 0.0)), 2.0);
        assert_eq!(v.radial(3.0), 4.0);
    }

    #[test]
    fn admissibility_flags() {
        assert!(Weight::<f64>::Constant.admissible());
        assert!(Weight::polynomial(3.0f64).admissible());
        assert!(Weight::subexponential(1.0f64, 0.5).admissible());
        assert!(!Weight::exponential(1.0f64).admissible());
    }

    #[test]
    fn radial_is_nondecreasing() {
        let weights = [
            Weight::polynomial(1.7),
            Weight::subexponential(0.4, 0.3),
            Weight::exponential(0.9),
        ];
        for v in &weights {
            let mut prev = v.radial(0.0);
            for i in 1..50 {
                let r = 0.25 * i as f64;
                let cur = v.radial(r);
                assert!(cur >= prev);
                prev = cur;
            }
        }
    }
}
