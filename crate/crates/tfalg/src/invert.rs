//! Inversion inside the algebra and the analysis built on top of it.
//!
//! Two Neumann-series routes produce an inverse together with a *certified*
//! residual: every truncation performed while summing the series reports its
//! discarded mass, and the reported `residual_av` is obtained by recomposing
//! the candidate inverse with the input from scratch and adding those
//! ledgers, so it never understates the true defect.
//!
//! * [`invert_contraction`] — applicable when the off-origin weighted mass is
//!   dominated by the origin coefficient; sums Σ (U_0 − T/c₀)ⁿ / c₀.
//! * [`invert_symmetric`] — the general route through
//!   T⁻¹ = (2/(A+B)) Σ (1 − (2/(A+B)) T*T)ⁿ T* given spectral bounds
//!   0 < A ≤ T*T ≤ B.
//!
//! The module also provides the closed-form inverse-norm bound for polynomial
//! weights, spectral-radius estimation from operator powers, exponential
//! decay certification for inverse coefficients, and the damped-slice probe
//! recovering the frequency support radius.

use num_complex::Complex;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::TfError;
use crate::operator::TfOperator;
use crate::point::TfPoint;
use crate::scalar::{KahanReal, Scalar};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InversionMode {
    Contraction,
    Symmetric,
}

impl InversionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InversionMode::Contraction => "contraction",
            InversionMode::Symmetric => "symmetric",
        }
    }
}

/// Outcome of a Neumann inversion.
///
/// `residual_av` is an upper bound on both ‖T∘inverse − U_0‖ and
/// ‖inverse∘T − U_0‖ in the weighted algebra norm, truncation ledgers
/// included. In contraction mode `a_bound`/`b_bound` are unused and zero;
/// `ratio` then holds the contraction factor instead of θ₀ = (B−A)/(B+A).
#[derive(Clone, Debug)]
pub struct InversionReport<T: Scalar> {
    pub inverse: TfOperator<T>,
    pub mode: InversionMode,
    pub iterations: usize,
    pub residual_av: T,
    pub a_bound: T,
    pub b_bound: T,
    pub ratio: T,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InversionReportRecord<T> {
    pub mode: String,
    pub iterations: usize,
    pub residual_av: T,
    pub a_bound: T,
    pub b_bound: T,
    pub ratio: T,
    pub inverse: crate::operator::OperatorRecord<T>,
}

impl<T: Scalar + Serialize + serde::de::DeserializeOwned> InversionReport<T> {
    pub fn to_record(&self) -> InversionReportRecord<T> {
        InversionReportRecord {
            mode: self.mode.as_str().to_string(),
            iterations: self.iterations,
            residual_av: self.residual_av,
            a_bound: self.a_bound,
            b_bound: self.b_bound,
            ratio: self.ratio,
            inverse: self.inverse.to_record(),
        }
    }
}

/// Recomputes the two-sided residual of a candidate inverse from scratch:
/// max(‖T∘X − U_0‖_v, ‖X∘T − U_0‖_v) plus the drop-threshold ledgers of the
/// verification products themselves.
pub fn verified_residual<T: Scalar>(
    t: &TfOperator<T>,
    candidate: &TfOperator<T>,
    v: &Weight<T>,
    term_cap: usize,
) -> Result<T, TfError> {
    let id = TfOperator::identity(t.dim());
    let minus_one = Complex::new(-T::one(), T::zero());
    let (left, d1) = t.compose_ledgered(candidate, Some(v), term_cap)?;
    let (left_diff, d2) = TfOperator::axpy_ledgered(minus_one, &id, &left, v)?;
    let r_left = left_diff.weighted_norm(v) + d1 + d2;
    let (right, d3) = candidate.compose_ledgered(t, Some(v), term_cap)?;
    let (right_diff, d4) = TfOperator::axpy_ledgered(minus_one, &id, &right, v)?;
    let r_right = right_diff.weighted_norm(v) + d3 + d4;
    Ok(Float::max(r_left, r_right))
}

/// Neumann inversion for operators with a dominant origin coefficient:
/// requires Σ_{λ≠0} v(λ)|c_λ| < |c₀|, i.e. ‖U_0 − T/c₀‖_{A_v} < 1.
pub fn invert_contraction<T: Scalar>(
    t: &TfOperator<T>,
    v: &Weight<T>,
    tol: T,
    max_iter: usize,
    term_cap: usize,
) -> Result<InversionReport<T>, TfError> {
    let d = t.dim();
    let origin = TfPoint::zero(d);
    let c0 = t.coeff(&origin);
    let c0_mag = c0.norm();
    let off_mass: T = t
        .iter_terms()
        .filter(|(p, _)| !p.is_zero())
        .map(|(p, c)| v.value(&p) * c.norm())
        .fold(T::zero(), |a, b| a + b);
    if c0_mag < T::drop_tol() || off_mass >= c0_mag {
        return Err(TfError::NotContractive {
            off_mass: off_mass.to_f64().unwrap_or(f64::NAN),
            center: c0_mag.to_f64().unwrap_or(f64::NAN),
        });
    }

    // N = U_0 − T/c₀ has no origin term and weighted norm θ < 1.
    let inv_c0 = Complex::new(T::one(), T::zero()) / c0;
    let n_op = {
        let terms: Vec<_> = t
            .iter_terms()
            .filter(|(p, _)| !p.is_zero())
            .map(|(p, c)| (p, -(c * inv_c0)))
            .collect();
        TfOperator::from_terms(d, terms)?
    };
    let theta = n_op.weighted_norm(v);

    let id = TfOperator::identity(d);
    if n_op.is_empty() {
        // Pure scalar multiple of the identity.
        return Ok(InversionReport {
            inverse: id.scale(inv_c0),
            mode: InversionMode::Contraction,
            iterations: 0,
            residual_av: T::zero(),
            a_bound: T::zero(),
            b_bound: T::zero(),
            ratio: theta,
        });
    }

    // Per-step truncation budget chosen so the total ledger effect on the
    // inverse stays below tol/2 even if all max_iter steps run.
    let one = T::one();
    let step_budget =
        tol * c0_mag * (one - theta) / (T::of(4.0) * T::of_usize(max_iter.max(1)));
    let t_over_c0_norm = t.weighted_norm(v) / c0_mag;

    let mut term = id.clone();
    let mut partial = id.clone();
    let mut term_err = T::zero(); // v-norm distance of `term` from the true power
    let mut series_err = KahanReal::<T>::default();
    let mut best_residual = T::infinity();

    for iter in 1..=max_iter {
        let (next, d_compose) = term.compose_ledgered(&n_op, Some(v), term_cap)?;
        let (next, d_trunc) = next.truncate(v, step_budget);
        term_err = term_err * theta + d_compose + d_trunc;
        term = next;
        series_err.add(term_err);
        partial = TfOperator::axpy(Complex::new(one, T::zero()), &term, &partial)?;

        // Residual of the exact partial sum is ‖N^{n+1}‖ ≤ θ·‖Nⁿ‖; add the
        // propagated series error amplified by ‖T/c₀‖.
        let cheap = theta * (term.weighted_norm(v) + term_err)
            + t_over_c0_norm * series_err.value();
        if cheap <= tol * T::of(0.9) || iter == max_iter {
            let candidate = partial.scale(inv_c0);
            let residual = verified_residual(t, &candidate, v, term_cap)?;
            best_residual = Float::min(best_residual, residual);
            if residual <= tol {
                return Ok(InversionReport {
                    inverse: candidate,
                    mode: InversionMode::Contraction,
                    iterations: iter,
                    residual_av: residual,
                    a_bound: T::zero(),
                    b_bound: T::zero(),
                    ratio: theta,
                });
            }
        }
    }
    Err(TfError::MaxIterations {
        max_iter,
        residual: best_residual.to_f64().unwrap_or(f64::NAN),
    })
}

/// Neumann inversion from spectral bounds 0 < A ≤ T*T ≤ B:
/// T⁻¹ = (2/(A+B)) Σ_{n≥0} Rⁿ T* with R = U_0 − (2/(A+B)) T*T.
pub fn invert_symmetric<T: Scalar>(
    t: &TfOperator<T>,
    v: &Weight<T>,
    a_bound: T,
    b_bound: T,
    tol: T,
    max_iter: usize,
    term_cap: usize,
) -> Result<InversionReport<T>, TfError> {
    if !(a_bound > T::zero() && a_bound <= b_bound) {
        return Err(TfError::InvalidBounds {
            a: a_bound.to_f64().unwrap_or(f64::NAN),
            b: b_bound.to_f64().unwrap_or(f64::NAN),
        });
    }
    let d = t.dim();
    let id = TfOperator::identity(d);
    let one = T::one();
    let scale = T::of(2.0) / (a_bound + b_bound);
    let theta0 = (b_bound - a_bound) / (b_bound + a_bound);

    let t_star = t.adjoint();
    let (tst, _) = t_star.compose_ledgered(t, Some(v), term_cap)?;
    let r_op = TfOperator::axpy(Complex::new(-scale, T::zero()), &tst, &id)?;
    let t_star_norm = t_star.weighted_norm(v);

    let mut r_pow = id.clone();
    let mut partial = id.clone();
    let mut iterations = 0;
    let mut best_residual = T::infinity();
    let step_budget = tol / (T::of(4.0) * scale * Float::max(t_star_norm, one))
        / T::of_usize(max_iter.max(1));

    let build = |partial: &TfOperator<T>| -> Result<TfOperator<T>, TfError> {
        let (prod, _) = partial.compose_ledgered(&t_star, Some(v), term_cap)?;
        Ok(prod.scale(Complex::new(scale, T::zero())))
    };

    // θ₀ = 0 means R vanishes identically (e.g. scaled unitaries): the n = 0
    // partial sum is already exact.
    let mut geometric_tail = if theta0.is_zero() {
        T::zero()
    } else {
        T::infinity()
    };
    loop {
        if geometric_tail <= tol * T::of(0.5) || iterations % 8 == 7 || iterations >= max_iter
        {
            let candidate = build(&partial)?;
            let residual = verified_residual(t, &candidate, v, term_cap)?;
            best_residual = Float::min(best_residual, residual);
            if residual <= tol {
                return Ok(InversionReport {
                    inverse: candidate,
                    mode: InversionMode::Symmetric,
                    iterations,
                    residual_av: residual,
                    a_bound,
                    b_bound,
                    ratio: theta0,
                });
            }
            if iterations >= max_iter {
                return Err(TfError::MaxIterations {
                    max_iter,
                    residual: best_residual.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let (next, _) = r_pow.compose_ledgered(&r_op, Some(v), term_cap)?;
        let (next, _) = next.truncate(v, step_budget);
        r_pow = next;
        partial = TfOperator::axpy(Complex::new(one, T::zero()), &r_pow, &partial)?;
        iterations += 1;
        // Cheap stopping heuristic; the verified residual is the arbiter.
        geometric_tail = Float::powi(theta0, iterations as i32 + 1) / (one - theta0)
            * scale
            * t_star_norm;
        let power_tail = r_pow.weighted_norm(v) * theta0 / (one - theta0)
            * scale
            * t_star_norm;
        geometric_tail = Float::min(geometric_tail, power_tail);
    }
}

/// Closed-form bound for the inverse norm under the polynomial weight
/// v(λ) = C(1+‖λ‖)^m:
///
/// ‖T⁻¹‖ ≤ (C ρ^m ‖T‖ / A) · (m+N)! · ((A+B)/(2A))^{m+N},
///
/// with N = |supp T|, R₀ the support radius, ρ = max(1, 2R₀). Valid whenever
/// 0 < A ≤ T*T ≤ B holds for the true operator.
pub fn inverse_norm_bound<T: Scalar>(
    t: &TfOperator<T>,
    c_weight: T,
    m: usize,
    a_bound: T,
    b_bound: T,
) -> Result<T, TfError> {
    if !(a_bound > T::zero() && a_bound <= b_bound) {
        return Err(TfError::InvalidBounds {
            a: a_bound.to_f64().unwrap_or(f64::NAN),
            b: b_bound.to_f64().unwrap_or(f64::NAN),
        });
    }
    if t.is_empty() {
        return Err(TfError::EmptyOperator);
    }
    let n_support = t.num_terms();
    let r0 = t.support_radius()?;
    let rho = Float::max(T::one(), T::of(2.0) * r0);
    let norm_t = c_weight * t.weighted_norm(&Weight::polynomial(T::of_usize(m)));

    let mut factorial = T::one();
    for k in 2..=(m + n_support) {
        factorial *= T::of_usize(k);
    }
    let growth = Float::powi(
        (a_bound + b_bound) / (T::of(2.0) * a_bound),
        (m + n_support) as i32,
    );
    Ok(c_weight * Float::powi(rho, m as i32) * norm_t / a_bound * factorial * growth)
}

/// Gelfand-formula data: n-th root norms of operator powers.
#[derive(Clone, Debug)]
pub struct GelfandEstimate<T> {
    /// `estimates[k]` = upper bound on ‖T^{k+1}‖^{1/(k+1)}, ledger included.
    pub estimates: Vec<T>,
    /// min over n — itself an upper bound on the spectral radius.
    pub extrapolated: T,
}

/// Estimates the spectral radius r(T) = lim ‖Tⁿ‖^{1/n} from above by
/// computing powers in the algebra. Truncation ledgers inflate each norm so
/// every entry stays a rigorous upper bound; the minimum over n is returned
/// as the extrapolation, valid because the norm sequence is submultiplicative.
pub fn gelfand_spectral_radius<T: Scalar>(
    t: &TfOperator<T>,
    v: &Weight<T>,
    n_max: usize,
    term_cap: usize,
) -> Result<GelfandEstimate<T>, TfError> {
    if n_max < 2 {
        return Err(TfError::InvalidArgument("n_max must be >= 2".into()));
    }
    let t_norm = t.weighted_norm(v);
    let mut power = t.clone();
    let mut err = T::zero();
    let mut estimates = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n > 1 {
            let (next, dropped) = power.compose_ledgered(t, Some(v), term_cap)?;
            err = err * t_norm + dropped;
            power = next;
        }
        let upper = power.weighted_norm(v) + err;
        if !Float::is_finite(upper) {
            break; // weight overflow at large radii; keep what we have
        }
        estimates.push(Float::powf(upper, T::one() / T::of_usize(n)));
    }
    let extrapolated = estimates
        .iter()
        .copied()
        .fold(T::infinity(), Float::min);
    Ok(GelfandEstimate {
        estimates,
        extrapolated,
    })
}

/// Exponential-decay certificate for inverse coefficients: every sampled
/// tail Σ_{|μ| ≥ R} |d_μ| (sup-norm radius) obeys tail ≤ c_const·e^{−delta·R}.
#[derive(Clone, Debug)]
pub struct DecayCertificate<T> {
    pub delta: T,
    pub c_const: T,
    pub tail_samples: Vec<(T, T)>,
    /// True when `delta` is the constructive rate ln((B+A)/(2(B−A)))/R₀ > 0;
    /// false when that rate is non-positive (B ≥ 3A) and `delta` is instead
    /// an empirical regression fit.
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayCertificateRecord<T> {
    pub delta: T,
    pub c_const: T,
    pub certified: bool,
    pub tails: Vec<(T, T)>,
}

impl<T: Scalar + Serialize> DecayCertificate<T> {
    pub fn to_record(&self) -> DecayCertificateRecord<T> {
        DecayCertificateRecord {
            delta: self.delta,
            c_const: self.c_const,
            certified: self.certified,
            tails: self.tail_samples.clone(),
        }
    }

    /// Least-squares slope of ln(tail) against R over the positive samples.
    pub fn log_tail_slope(&self) -> Option<T> {
        regression_slope(
            &self
                .tail_samples
                .iter()
                .filter(|(_, s)| *s > T::zero())
                .map(|&(r, s)| (r, Float::ln(s)))
                .collect::<Vec<_>>(),
        )
    }
}

fn regression_slope<T: Scalar>(points: &[(T, T)]) -> Option<T> {
    if points.len() < 2 {
        return None;
    }
    let n = T::of_usize(points.len());
    let sx: T = points.iter().map(|p| p.0).fold(T::zero(), |a, b| a + b);
    let sy: T = points.iter().map(|p| p.1).fold(T::zero(), |a, b| a + b);
    let sxx: T = points.iter().map(|p| p.0 * p.0).fold(T::zero(), |a, b| a + b);
    let sxy: T = points
        .iter()
        .map(|p| p.0 * p.1)
        .fold(T::zero(), |a, b| a + b);
    let denom = n * sxx - sx * sx;
    (Float::abs(denom) > T::of(1e-30)).then(|| (n * sxy - sx * sy) / denom)
}

/// Sum of |d_μ| over support points with sup-norm ≥ radius.
pub fn coefficient_tail<T: Scalar>(op: &TfOperator<T>, radius: T) -> T {
    let mut acc = KahanReal::default();
    for (p, c) in op.iter_terms() {
        if p.sup_norm() >= radius {
            acc.add(c.norm());
        }
    }
    acc.value()
}

/// Certifies exponential decay of the inverse coefficients using the
/// constructive rate δ = ln((B+A)/(2(B−A)))/r₀, where r₀ bounds the support
/// radius of R = 1 − (2/(A+B))T*T. When B ≥ 3A that rate is non-positive and
/// an empirical regression rate is reported instead, flagged uncertified.
pub fn certify_decay<T: Scalar>(
    inverse: &TfOperator<T>,
    a_bound: T,
    b_bound: T,
    r0: T,
    radii: &[T],
) -> Result<DecayCertificate<T>, TfError> {
    if !(a_bound > T::zero() && a_bound <= b_bound) {
        return Err(TfError::InvalidBounds {
            a: a_bound.to_f64().unwrap_or(f64::NAN),
            b: b_bound.to_f64().unwrap_or(f64::NAN),
        });
    }
    if r0 <= T::zero() {
        return Err(TfError::InvalidArgument("r0 must be > 0".into()));
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(TfError::InvalidArgument(
            "radii must be nonempty and strictly increasing".into(),
        ));
    }

    let tail_samples: Vec<(T, T)> = radii
        .iter()
        .map(|&r| (r, coefficient_tail(inverse, r)))
        .collect();

    let gap = b_bound - a_bound;
    // B = A means R = 0 and the series is a single term; any rate certifies,
    // so clamp to keep e^{δR} finite.
    let rate_cap = T::of(50.0) / r0;
    let (delta, certified) = if gap <= T::zero() {
        (rate_cap, true)
    } else {
        let raw = Float::ln((b_bound + a_bound) / (T::of(2.0) * gap)) / r0;
        if raw > T::zero() {
            (Float::min(raw, rate_cap), true)
        } else {
            // Fallback: empirical rate, flagged.
            let slope = regression_slope(
                &tail_samples
                    .iter()
                    .filter(|(_, s)| *s > T::zero())
                    .map(|&(r, s)| (r, Float::ln(s)))
                    .collect::<Vec<_>>(),
            )
            .unwrap_or(T::zero());
            (Float::max(-slope, T::zero()), false)
        }
    };

    let mut c_const = T::zero();
    for &(r, s) in &tail_samples {
        if s > T::zero() {
            c_const = Float::max(c_const, s * Float::exp(delta * r));
        }
    }
    Ok(DecayCertificate {
        delta,
        c_const,
        tail_samples,
        certified,
    })
}

/// Sample directions for the damped-slice probe: all sign patterns of the
/// coordinates (normalized) plus the signed coordinate axes.
fn probe_directions<T: Scalar>(d: usize) -> Vec<Vec<T>> {
    let mut dirs = Vec::new();
    let scale = T::one() / Float::sqrt(T::of_usize(d));
    for mask in 0..(1usize << d) {
        dirs.push(
            (0..d)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        -scale
                    } else {
                        scale
                    }
                })
                .collect(),
        );
    }
    if d > 1 {
        for axis in 0..d {
            for sign in [T::one(), -T::one()] {
                let mut y = vec![T::zero(); d];
                y[axis] = sign;
                dirs.push(y);
            }
        }
    }
    dirs
}

/// Recovers (a lower estimate of) max_λ ‖ω_λ‖ from the growth of damped
/// slices: M(ρ) = max_y ‖T^{(ρy)}‖_A over unit sample directions, and the
/// largest successive slope of ln M is the frequency radius as ρ grows.
pub fn frequency_support_probe<T: Scalar>(
    t: &TfOperator<T>,
    rho_list: &[T],
) -> Result<T, TfError> {
    if rho_list.len() < 2
        || rho_list[0] <= T::zero()
        || rho_list.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(TfError::InvalidArgument(
            "rho_list must be >= 2 increasing positive values".into(),
        ));
    }
    if t.is_empty() {
        return Ok(T::zero());
    }
    let dirs = probe_directions::<T>(t.dim());
    let log_m: Result<Vec<T>, TfError> = rho_list
        .iter()
        .map(|&rho| {
            let mut best = T::zero();
            for y in &dirs {
                let scaled: Vec<T> = y.iter().map(|&c| c * rho).collect();
                let norm = t.damped_slice(&scaled)?.l1_norm();
                best = Float::max(best, norm);
            }
            Ok(Float::ln(best))
        })
        .collect();
    let log_m = log_m?;
    let mut omega_hat = T::zero();
    for i in 0..log_m.len() - 1 {
        let slope = (log_m[i + 1] - log_m[i]) / (rho_list[i + 1] - rho_list[i]);
        omega_hat = Float::max(omega_hat, slope);
    }
    Ok(omega_hat)
}
