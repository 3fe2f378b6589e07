//! Scalar abstraction for the whole crate.
//!
//! Every numeric routine is generic over a real scalar `T: Scalar`; complex
//! values are `num_complex::Complex<T>` throughout. The trait bundles the
//! arithmetic bounds the algebra, the dense oracle (nalgebra) and the FFT
//! paths (rustfft) need, plus two per-type constants:
//!
//! * [`Scalar::quantum`] — the resolution to which phase-space coordinates
//!   are snapped so that sums of coordinates collide deterministically, and
//! * [`Scalar::drop_tol`] — the modulus below which accumulated coefficients
//!   are considered dead and removed from operator term maps.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar type usable as the coefficient field base (`f32` or `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
    + nalgebra::RealField
    + rustfft::FftNum
{
    /// Quantization step for phase-space coordinates.
    ///
    /// A power of two, so that every snapped coordinate is an exact multiple
    /// and sums of snapped coordinates up to a generous magnitude are again
    /// exact multiples: additions of quantized points never drift between
    /// buckets regardless of association order.
    fn quantum() -> Self;

    /// Absolute modulus threshold below which stored coefficients are dropped.
    fn drop_tol() -> Self;

    /// Shorthand for lossless conversion from `f64` literals in formulas.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Shorthand for exact conversion of small integers.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Scalar for f64 {
    // 2^-44: fine enough that snapping perturbs transcendental inputs (pi,
    // frequencies) by < 3e-14, coarse enough that multiples up to 2^9 add
    // exactly in double precision.
    fn quantum() -> Self {
        2f64.powi(-44)
    }

    fn drop_tol() -> Self {
        1e-15
    }
}

impl Scalar for f32 {
    fn quantum() -> Self {
        2f32.powi(-16)
    }

    fn drop_tol() -> Self {
        1e-6
    }
}

/// Compensated (Kahan) accumulator for complex sums.
///
/// Term maps are merged with this so that accumulation error stays near one
/// ulp of the running sum; associativity of the algebra product is then
/// testable at 1e-12 instead of drowning in summation noise.
#[derive(Clone, Copy, Debug)]
pub struct Kahan<T: Scalar> {
    sum: Complex<T>,
    carry: Complex<T>,
}

impl<T: Scalar> Default for Kahan<T> {
    fn default() -> Self {
        Self {
            sum: Complex::new(T::zero(), T::zero()),
            carry: Complex::new(T::zero(), T::zero()),
        }
    }
}

impl<T: Scalar> Kahan<T> {
    pub fn add(&mut self, value: Complex<T>) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> Complex<T> {
        self.sum
    }
}

/// Compensated accumulator for nonnegative real tallies (norms, ledgers).
#[derive(Clone, Copy, Debug)]
pub struct KahanReal<T: Scalar> {
    sum: T,
    carry: T,
}

impl<T: Scalar> Default for KahanReal<T> {
    fn default() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }
}

impl<T: Scalar> KahanReal<T> {
    pub fn add(&mut self, value: T) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantum_is_power_of_two() {
        assert_eq!(f64::quantum().log2(), -44.0);
        assert_eq!(f32::quantum().log2(), -16.0);
    }

    #[test]
    fn kahan_recovers_cancellation() {
        // Naive summation loses the 1e-17 contributions entirely (each add
        // rounds back to 1.0); compensation keeps them.
        let mut acc = Kahan::<f64>::default();
        acc.add(Complex::new(1.0, 0.0));
        for _ in 0..10 {
            acc.add(Complex::new(1e-17, 1e-17));
        }
        acc.add(Complex::new(-1.0, 0.0));
        assert!((acc.value().re - 1e-16).abs() < 2e-17);
        assert!((acc.value().im - 1e-16).abs() < 2e-17);
    }
}
