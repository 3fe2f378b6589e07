//! Finitely supported operators T = Σ_λ c_λ U_λ and the *-algebra operations.
//!
//! Products follow the twisted convolution law induced by
//! U_{t₁,ω₁} U_{t₂,ω₂} = e^{−i⟨t₁,ω₂⟩} U_{t₁+t₂, ω₁+ω₂}
//! (modulation-after-shift convention), adjoints by
//! U_{t,ω}^* = e^{−i⟨t,ω⟩} U_{−t,−ω}. Coefficients are accumulated per
//! quantized support point with compensated summation, in key order, and
//! entries whose modulus falls below [`Scalar::drop_tol`] are removed; every
//! routine that can discard mass reports how much, so callers can maintain
//! rigorous norm ledgers.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Float;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::TfError;
use crate::point::{PointKey, TfPoint};
use crate::scalar::{Kahan, KahanReal, Scalar};
use crate::weight::Weight;

/// Default cap on live terms during series computations; support of powers
/// grows like (n+1)^{|Λ|}, so unbounded growth must fail loudly.
pub const DEFAULT_TERM_CAP: usize = 200_000;

/// The three coefficient norms of interest, chained linf ≤ l2 ≤ l1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoeffNorms<T> {
    pub linf: T,
    pub l2: T,
    pub l1: T,
}

/// A finitely supported element of the time-frequency shift algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct TfOperator<T: Scalar> {
    dim: usize,
    terms: BTreeMap<PointKey, Complex<T>>,
}

impl<T: Scalar> TfOperator<T> {
    /// The zero operator in dimension `d`.
    pub fn zero(d: usize) -> Self {
        assert!(d >= 1, "dimension must be >= 1");
        Self {
            dim: d,
            terms: BTreeMap::new(),
        }
    }

    /// The identity U_0.
    pub fn identity(d: usize) -> Self {
        Self::unit(TfPoint::zero(d))
    }

    /// The unitary generator 1·U_λ.
    pub fn unit(point: TfPoint<T>) -> Self {
        Self::single(point, Complex::new(T::one(), T::zero()))
    }

    /// The single-term operator c·U_λ.
    pub fn single(point: TfPoint<T>, coeff: Complex<T>) -> Self {
        let mut terms = BTreeMap::new();
        if coeff.norm() >= T::drop_tol() {
            terms.insert(point.key(), coeff);
        }
        Self {
            dim: point.dim(),
            terms,
        }
    }

    /// Builds an operator from a term list; coefficients at coinciding
    /// quantized points are summed, dead entries dropped.
    pub fn from_terms(
        d: usize,
        terms: impl IntoIterator<Item = (TfPoint<T>, Complex<T>)>,
    ) -> Result<Self, TfError> {
        let mut acc: BTreeMap<PointKey, Kahan<T>> = BTreeMap::new();
        for (point, coeff) in terms {
            if point.dim() != d {
                return Err(TfError::DimensionMismatch {
                    expected: d,
                    got: point.dim(),
                });
            }
            acc.entry(point.key()).or_default().add(coeff);
        }
        Ok(Self::finalize(d, acc, None, usize::MAX)?.0)
    }

    fn finalize(
        d: usize,
        acc: BTreeMap<PointKey, Kahan<T>>,
        ledger_weight: Option<&Weight<T>>,
        cap: usize,
    ) -> Result<(Self, T), TfError> {
        if acc.len() > cap {
            return Err(TfError::TermCapExceeded {
                terms: acc.len(),
                cap,
            });
        }
        let mut dropped = KahanReal::<T>::default();
        let mut terms = BTreeMap::new();
        for (key, kahan) in acc {
            let value = kahan.value();
            if value.norm() < T::drop_tol() {
                let w = ledger_weight
                    .map(|v| v.value(&TfPoint::<T>::from_key(&key)))
                    .unwrap_or_else(T::one);
                dropped.add(w * value.norm());
            } else {
                terms.insert(key, value);
            }
        }
        Ok((Self { dim: d, terms }, dropped.value()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient at λ (zero if off-support).
    pub fn coeff(&self, point: &TfPoint<T>) -> Complex<T> {
        self.terms
            .get(&point.key())
            .copied()
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    /// Iterates (point, coefficient) pairs in quantized key order.
    pub fn iter_terms(&self) -> impl Iterator<Item = (TfPoint<T>, Complex<T>)> + '_ {
        self.terms
            .iter()
            .map(|(k, &c)| (TfPoint::from_key(k), c))
    }

    /// The support as points, in key order.
    pub fn support(&self) -> Vec<TfPoint<T>> {
        self.terms.keys().map(TfPoint::from_key).collect()
    }

    fn check_dim(&self, other: &Self) -> Result<(), TfError> {
        if self.dim != other.dim {
            return Err(TfError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    /// Operator product via twisted convolution:
    /// (c ♯ d)_λ = Σ_{μ+ν=λ} c_μ d_ν e^{−i⟨t_μ, ω_ν⟩}.
    pub fn compose(&self, other: &Self) -> Result<Self, TfError> {
        Ok(self.compose_ledgered(other, None, usize::MAX)?.0)
    }

    /// Product with explicit accounting: also returns the (weighted) mass of
    /// coefficients discarded by the drop threshold, and enforces a live-term
    /// cap. `ledger_weight = None` weighs the ledger with the constant weight.
    pub fn compose_ledgered(
        &self,
        other: &Self,
        ledger_weight: Option<&Weight<T>>,
        cap: usize,
    ) -> Result<(Self, T), TfError> {
        self.check_dim(other)?;
        let left: Vec<(PointKey, TfPoint<T>, Complex<T>)> = self
            .terms
            .iter()
            .map(|(k, &c)| (k.clone(), TfPoint::from_key(k), c))
            .collect();
        let right: Vec<(PointKey, TfPoint<T>, Complex<T>)> = other
            .terms
            .iter()
            .map(|(k, &c)| (k.clone(), TfPoint::from_key(k), c))
            .collect();

        let mut acc: BTreeMap<PointKey, Kahan<T>> = BTreeMap::new();
        for (ka, pa, ca) in &left {
            for (kb, pb, cb) in &right {
                let phase = Complex::from_polar(T::one(), -pa.time_dot_freq(pb));
                acc.entry(ka.plus(kb)).or_default().add(*ca * *cb * phase);
                if acc.len() > cap {
                    return Err(TfError::TermCapExceeded {
                        terms: acc.len(),
                        cap,
                    });
                }
            }
        }
        Self::finalize(self.dim, acc, ledger_weight, cap)
    }

    /// Adjoint: (T*)_{−λ} = conj(c_λ) e^{−i⟨t_λ, ω_λ⟩}. Isometric involution
    /// for every weighted norm.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(k, &c)| {
                let p = TfPoint::<T>::from_key(k);
                let phase = Complex::from_polar(T::one(), -p.self_pairing());
                (k.negated(), c.conj() * phase)
            })
            .collect();
        Self {
            dim: self.dim,
            terms,
        }
    }

    /// αa + b.
    pub fn axpy(alpha: Complex<T>, a: &Self, b: &Self) -> Result<Self, TfError> {
        Ok(Self::axpy_ledgered(alpha, a, b, &Weight::Constant)?.0)
    }

    /// αa + b together with the weighted mass lost to the drop threshold.
    pub fn axpy_ledgered(
        alpha: Complex<T>,
        a: &Self,
        b: &Self,
        ledger_weight: &Weight<T>,
    ) -> Result<(Self, T), TfError> {
        a.check_dim(b)?;
        let mut acc: BTreeMap<PointKey, Kahan<T>> = BTreeMap::new();
        for (k, &c) in &a.terms {
            acc.entry(k.clone()).or_default().add(alpha * c);
        }
        for (k, &c) in &b.terms {
            acc.entry(k.clone()).or_default().add(c);
        }
        Self::finalize(a.dim, acc, Some(ledger_weight), usize::MAX)
    }

    /// αa.
    pub fn scale(&self, alpha: Complex<T>) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|(k, &c)| {
                let v = alpha * c;
                (v.norm() >= T::drop_tol()).then(|| (k.clone(), v))
            })
            .collect();
        Self {
            dim: self.dim,
            terms,
        }
    }

    /// a − b.
    pub fn sub(&self, other: &Self) -> Result<Self, TfError> {
        Self::axpy(Complex::new(-T::one(), T::zero()), other, self)
    }

    /// Weighted algebra norm Σ_λ v(λ)|c_λ|.
    pub fn weighted_norm(&self, v: &Weight<T>) -> T {
        let mut acc = KahanReal::default();
        for (k, c) in &self.terms {
            acc.add(v.value(&TfPoint::from_key(k)) * c.norm());
        }
        acc.value()
    }

    /// Plain ℓ¹ norm of the coefficients (constant weight).
    pub fn l1_norm(&self) -> T {
        self.weighted_norm(&Weight::Constant)
    }

    /// (max |c_λ|, ‖c‖₂, ‖c‖₁).
    pub fn coefficient_norms(&self) -> CoeffNorms<T> {
        let mut linf = T::zero();
        let mut sq = KahanReal::default();
        let mut l1 = KahanReal::default();
        for c in self.terms.values() {
            let m = c.norm();
            linf = Float::max(linf, m);
            sq.add(m * m);
            l1.add(m);
        }
        CoeffNorms {
            linf,
            l2: Float::sqrt(sq.value()),
            l1: l1.value(),
        }
    }

    /// max_{λ ∈ supp} ‖λ‖ (Euclidean).
    pub fn support_radius(&self) -> Result<T, TfError> {
        if self.terms.is_empty() {
            return Err(TfError::EmptyOperator);
        }
        Ok(self
            .terms
            .keys()
            .map(|k| TfPoint::<T>::from_key(k).norm())
            .fold(T::zero(), Float::max))
    }

    /// max_{λ ∈ supp} ‖ω_λ‖ — radius of the frequency projection of the
    /// support. Zero for the empty operator.
    pub fn frequency_radius(&self) -> T {
        self.terms
            .keys()
            .map(|k| {
                let p = TfPoint::<T>::from_key(k);
                let sq = p.omega().iter().map(|&x| x * x).fold(T::zero(), |a, b| a + b);
                Float::sqrt(sq)
            })
            .fold(T::zero(), Float::max)
    }

    /// Greedily removes the smallest v(λ)|c_λ| terms while the discarded
    /// weighted mass stays ≤ `budget`; returns the exact discarded mass.
    pub fn truncate(&self, v: &Weight<T>, budget: T) -> (Self, T) {
        assert!(budget >= T::zero(), "truncation budget must be >= 0");
        let mut ranked: Vec<(T, PointKey)> = self
            .terms
            .iter()
            .map(|(k, c)| (v.value(&TfPoint::from_key(k)) * c.norm(), k.clone()))
            .collect();
        // Key as tie-breaker keeps the selection deterministic.
        ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));

        let mut dropped = KahanReal::default();
        let mut kill: Vec<PointKey> = Vec::new();
        for (mass, key) in ranked {
            if dropped.value() + mass <= budget {
                dropped.add(mass);
                kill.push(key);
            } else {
                break;
            }
        }
        let mut out = self.clone();
        for key in kill {
            out.terms.remove(&key);
        }
        (out, dropped.value())
    }

    /// Keeps the `keep` largest terms under the weight, discarding the rest;
    /// returns the exact discarded weighted mass. Used by series summation
    /// when a hard cap matters more than a mass budget.
    pub fn truncate_to_terms(&self, v: &Weight<T>, keep: usize) -> (Self, T) {
        if self.terms.len() <= keep {
            return (self.clone(), T::zero());
        }
        let mut ranked: Vec<(T, PointKey)> = self
            .terms
            .iter()
            .map(|(k, c)| (v.value(&TfPoint::from_key(k)) * c.norm(), k.clone()))
            .collect();
        ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
        let n_drop = self.terms.len() - keep;
        let mut dropped = KahanReal::default();
        let mut out = self.clone();
        for (mass, key) in ranked.into_iter().take(n_drop) {
            dropped.add(mass);
            out.terms.remove(&key);
        }
        (out, dropped.value())
    }

    /// Rescales every coefficient time-frequency-wise by e^{−⟨ω_λ, y⟩}:
    /// the restriction of the operator to the damped slice indexed by y.
    pub fn damped_slice(&self, y: &[T]) -> Result<Self, TfError> {
        if y.len() != self.dim {
            return Err(TfError::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        let terms = self
            .terms
            .iter()
            .filter_map(|(k, &c)| {
                let p = TfPoint::<T>::from_key(k);
                let dot = p
                    .omega()
                    .iter()
                    .zip(y)
                    .map(|(&w, &yi)| w * yi)
                    .fold(T::zero(), |a, b| a + b);
                let v = c * Complex::new(Float::exp(-dot), T::zero());
                (v.norm() >= T::drop_tol()).then(|| (k.clone(), v))
            })
            .collect();
        Ok(Self {
            dim: self.dim,
            terms,
        })
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

/// One serialized term of the operator file format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermRecord<T> {
    pub t: Vec<T>,
    pub omega: Vec<T>,
    pub re: T,
    pub im: T,
}

/// The operator file format: `{"dim": d, "terms": [...]}` with terms sorted
/// lexicographically by quantized (t, ω) for byte-stable output. Duplicate
/// (t, ω) entries are summed on load.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorRecord<T> {
    pub dim: usize,
    pub terms: Vec<TermRecord<T>>,
}

impl<T: Scalar + Serialize + DeserializeOwned> TfOperator<T> {
    pub fn to_record(&self) -> OperatorRecord<T> {
        OperatorRecord {
            dim: self.dim,
            terms: self
                .iter_terms()
                .map(|(p, c)| TermRecord {
                    t: p.t().to_vec(),
                    omega: p.omega().to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn from_record(record: &OperatorRecord<T>) -> Result<Self, TfError> {
        let terms: Result<Vec<_>, TfError> = record
            .terms
            .iter()
            .map(|entry| {
                let point = TfPoint::new(entry.t.clone(), entry.omega.clone())?;
                Ok((point, Complex::new(entry.re, entry.im)))
            })
            .collect();
        Self::from_terms(record.dim, terms?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("operator serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TfError> {
        let record: OperatorRecord<T> = serde_json::from_str(text)
            .map_err(|e| TfError::InvalidArgument(format!("operator file: {e}")))?;
        Self::from_record(&record)
    }
}
