//! Points of the time-frequency plane.
//!
//! A point λ = (t, ω) ∈ ℝ^d × ℝ^d labels the unitary
//! U_λ f(x) = e^{i⟨ω,x⟩} f(x − t). Supports of operators are finite sets of
//! such points with no lattice structure assumed, so bookkeeping needs a
//! deterministic notion of equality for floating-point sums of points:
//! coordinates are snapped to the scalar type's [`Scalar::quantum`] grid on
//! construction, and equality/ordering act on the integer multipliers.

use std::cmp::Ordering;

use num_traits::Float;

use crate::error::TfError;
use crate::scalar::Scalar;

/// Integer image of a point under coordinate quantization.
///
/// Layout: `[t_1, …, t_d, ω_1, …, ω_d]` as multiples of the quantum.
/// Lexicographic order on this key is the canonical term order used for
/// serialization and deterministic accumulation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointKey(pub Vec<i64>);

impl PointKey {
    /// Key of λ + μ; exact integer addition, no rounding concerns.
    pub fn plus(&self, other: &PointKey) -> PointKey {
        PointKey(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn negated(&self) -> PointKey {
        PointKey(self.0.iter().map(|a| -a).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }
}

/// A time-frequency point with quantized coordinates.
#[derive(Clone, Debug)]
pub struct TfPoint<T: Scalar> {
    t: Vec<T>,
    omega: Vec<T>,
}

impl<T: Scalar> TfPoint<T> {
    /// Builds a point from raw coordinates, snapping each component to the
    /// quantization grid. Fails on dimension mismatch, empty dimension, or
    /// non-finite components.
    pub fn new(t: Vec<T>, omega: Vec<T>) -> Result<Self, TfError> {
        if t.is_empty() || t.len() != omega.len() {
            return Err(TfError::DimensionMismatch {
                expected: t.len(),
                got: omega.len(),
            });
        }
        if t.iter().chain(omega.iter()).any(|x| !Float::is_finite(*x)) {
            return Err(TfError::NonFiniteCoordinate);
        }
        Ok(Self {
            t: t.into_iter().map(snap).collect(),
            omega: omega.into_iter().map(snap).collect(),
        })
    }

    /// One-dimensional convenience constructor.
    pub fn new_1d(t: T, omega: T) -> Result<Self, TfError> {
        Self::new(vec![t], vec![omega])
    }

    /// The origin of phase space in dimension `d` (labels the identity U_0).
    pub fn zero(d: usize) -> Self {
        Self {
            t: vec![T::zero(); d],
            omega: vec![T::zero(); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    pub fn t(&self) -> &[T] {
        &self.t
    }

    pub fn omega(&self) -> &[T] {
        &self.omega
    }

    pub fn is_zero(&self) -> bool {
        self.t.iter().chain(self.omega.iter()).all(|x| x.is_zero())
    }

    /// Euclidean norm of the full 2d-vector (t, ω).
    pub fn norm(&self) -> T {
        let sq = self
            .t
            .iter()
            .chain(self.omega.iter())
            .map(|&x| x * x)
            .fold(T::zero(), |a, b| a + b);
        Float::sqrt(sq)
    }

    /// Sup-norm of the full 2d-vector, max_i max(|t_i|, |ω_i|).
    pub fn sup_norm(&self) -> T {
        self.t
            .iter()
            .chain(self.omega.iter())
            .map(|&x| Float::abs(x))
            .fold(T::zero(), |a, b| Float::max(a, b))
    }

    /// ⟨t_self, ω_other⟩ — the pairing that generates composition phases.
    pub fn time_dot_freq(&self, other: &TfPoint<T>) -> T {
        self.t
            .iter()
            .zip(other.omega.iter())
            .map(|(&a, &b)| a * b)
            .fold(T::zero(), |a, b| a + b)
    }

    /// ⟨t, ω⟩ of this point itself.
    pub fn self_pairing(&self) -> T {
        self.time_dot_freq(self)
    }

    /// Vector sum; exact at the quantization resolution.
    pub fn plus(&self, other: &TfPoint<T>) -> TfPoint<T> {
        TfPoint {
            t: self
                .t
                .iter()
                .zip(&other.t)
                .map(|(&a, &b)| snap(a + b))
                .collect(),
            omega: self
                .omega
                .iter()
                .zip(&other.omega)
                .map(|(&a, &b)| snap(a + b))
                .collect(),
        }
    }

    pub fn negated(&self) -> TfPoint<T> {
        TfPoint {
            t: self.t.iter().map(|&a| -a).collect(),
            omega: self.omega.iter().map(|&a| -a).collect(),
        }
    }

    pub fn key(&self) -> PointKey {
        let q = T::quantum();
        PointKey(
            self.t
                .iter()
                .chain(self.omega.iter())
                .map(|&x| {
                    let k = Float::round(x / q);
                    k.to_i64().expect("quantized coordinate fits in i64")
                })
                .collect(),
        )
    }

    /// Reconstructs the snapped point from its integer key.
    pub fn from_key(key: &PointKey) -> TfPoint<T> {
        let d = key.0.len() / 2;
        let q = T::quantum();
        let coord = |k: i64| T::from_i64(k).expect("key fits scalar") * q;
        TfPoint {
            t: key.0[..d].iter().map(|&k| coord(k)).collect(),
            omega: key.0[d..].iter().map(|&k| coord(k)).collect(),
        }
    }
}

/// Snap a coordinate to the quantization grid.
fn snap<T: Scalar>(x: T) -> T {
    let q = T::quantum();
    Float::round(x / q) * q
}

impl<T: Scalar> PartialEq for TfPoint<T> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl<T: Scalar> Eq for TfPoint<T> {}

impl<T: Scalar> PartialOrd for TfPoint<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for TfPoint<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping_makes_sums_associative() {
        let a = TfPoint::new_1d(0.1f64, 0.7).unwrap();
        let b = TfPoint::new_1d(0.2, -0.3).unwrap();
        let c = TfPoint::new_1d(0.3, 1.9).unwrap();
        let left = a.plus(&b).plus(&c);
        let right = a.plus(&b.plus(&c));
        assert_eq!(left.key(), right.key());
        assert_eq!(left.t()[0], right.t()[0]);
    }

    #[test]
    fn pi_snapping_error_is_tiny() {
        let p = TfPoint::new_1d(0.0f64, std::f64::consts::PI).unwrap();
        assert!((p.omega()[0] - std::f64::consts::PI).abs() < 3e-14);
    }

    #[test]
    fn norms() {
        let p = TfPoint::new_1d(3.0f64, 4.0).unwrap();
        assert_eq!(p.norm(), 5.0);
        assert_eq!(p.sup_norm(), 4.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(TfPoint::new(vec![1.0f64], vec![1.0, 2.0]).is_err());
        assert!(TfPoint::new_1d(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn key_roundtrip() {
        let p = TfPoint::new_1d(1.25f64, -0.5).unwrap();
        let back = TfPoint::<f64>::from_key(&p.key());
        assert_eq!(p, back);
        assert_eq!(p.t()[0], back.t()[0]);
        assert_eq!(p.omega()[0], back.omega()[0]);
    }
}
