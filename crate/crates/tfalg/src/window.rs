//! Construction of a window making prescribed time-frequency shifts
//! orthonormal.
//!
//! Given a finite set Σ of time-frequency points, orthonormality of
//! {U_σ g : σ ∈ Σ} reduces to ⟨U_μ g, g⟩ = δ_{μ,0} over the difference set
//! Δ = Σ − Σ. The window
//!
//!   g = √(h₁ * h₂ * … * h_M) / ‖·‖,   h_k = 1_E + 1_{t_k + E},
//!
//! kills differences with a nonzero time component by support disjointness
//! (the shifts t_k grow fast enough that all 2^M bumps stay far apart), and
//! pure frequency differences ω_k through ℱ(h_k)(ω_k) = 0, arranged by
//! choosing ⟨t_k, ω_k⟩ an odd multiple of π. Here E is a Euclidean ball of
//! radius τ_min/(2M), which keeps bump diameters below the smallest nonzero
//! time difference so that the disjointness argument actually closes.

use num_complex::Complex;
use num_traits::Float;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::TfError;
use crate::oracle::{Grid, GridFunction, ShiftMode};
use crate::point::TfPoint;
use crate::scalar::{Kahan, Scalar};

/// Construction data for one window: the difference set, its projections,
/// the separation radii, and the chosen shifts with their parities.
#[derive(Clone, Debug)]
pub struct WindowPlan<T: Scalar> {
    pub sigma: Vec<TfPoint<T>>,
    pub delta_set: Vec<TfPoint<T>>,
    pub time_proj: Vec<Vec<T>>,
    pub freq_proj: Vec<Vec<T>>,
    pub tau_min: T,
    pub tau_max: T,
    /// One frequency representative per ± pair of the nonzero frequency
    /// projections; shift k pairs against `frequencies[k]`.
    pub frequencies: Vec<Vec<T>>,
    pub shifts: Vec<Vec<T>>,
    /// ⟨t_k, ω_k⟩ = `(2·parities[k] + 1)`·π.
    pub parities: Vec<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowPlanRecord<T> {
    pub sigma: Vec<(Vec<T>, Vec<T>)>,
    pub delta_set: Vec<(Vec<T>, Vec<T>)>,
    pub time_proj: Vec<Vec<T>>,
    pub freq_proj: Vec<Vec<T>>,
    pub tau_min: T,
    pub tau_max: T,
    pub frequencies: Vec<Vec<T>>,
    pub shifts: Vec<Vec<T>>,
    pub parities: Vec<i64>,
}

impl<T: Scalar> WindowPlan<T> {
    pub fn to_record(&self) -> WindowPlanRecord<T> {
        let points = |list: &[TfPoint<T>]| {
            list.iter()
                .map(|p| (p.t().to_vec(), p.omega().to_vec()))
                .collect()
        };
        WindowPlanRecord {
            sigma: points(&self.sigma),
            delta_set: points(&self.delta_set),
            time_proj: self.time_proj.clone(),
            freq_proj: self.freq_proj.clone(),
            tau_min: self.tau_min,
            tau_max: self.tau_max,
            frequencies: self.frequencies.clone(),
            shifts: self.shifts.clone(),
            parities: self.parities.clone(),
        }
    }

    /// Number of constructed shifts (M).
    pub fn shift_count(&self) -> usize {
        self.shifts.len()
    }

    /// Half-length a realization grid must provide: all 2^M bump centers are
    /// subset sums of the shifts, plus the τ_max margin.
    pub fn required_half_length(&self) -> T {
        let sum: T = self
            .shifts
            .iter()
            .map(|t| euclid(t))
            .fold(T::zero(), |a, b| a + b);
        sum + self.tau_max
    }

    /// Checks the three invariant families the construction relies on.
    pub fn verify_invariants(&self) -> Result<(), TfError> {
        for t in &self.time_proj {
            let norm = euclid(t);
            if norm > T::zero() && norm <= self.tau_min {
                return Err(TfError::InvalidArgument(format!(
                    "tau_min separation violated: nonzero time projection of norm {norm}"
                )));
            }
            if norm > self.tau_max * (T::one() + T::of(1e-12)) {
                return Err(TfError::InvalidArgument(
                    "tau_max does not cover the time projections".into(),
                ));
            }
        }
        let pi = T::PI();
        for ((t, omega), &parity) in self
            .shifts
            .iter()
            .zip(&self.frequencies)
            .zip(&self.parities)
        {
            let pairing: T = t
                .iter()
                .zip(omega)
                .map(|(&a, &b)| a * b)
                .fold(T::zero(), |acc, v| acc + v);
            let target = T::from_i64(2 * parity + 1).unwrap() * pi;
            let tol = T::of(1e-12) * Float::max(T::one(), Float::abs(target));
            if Float::abs(pairing - target) > tol {
                return Err(TfError::InvalidArgument(format!(
                    "shift pairing {pairing} is not the odd multiple {target} of pi"
                )));
            }
        }
        let two_m = T::of_usize(2 * self.shifts.len().max(1));
        let mut cumulative = T::zero();
        for (k, t) in self.shifts.iter().enumerate() {
            let norm = euclid(t);
            let floor = if k == 0 {
                self.tau_max
            } else {
                cumulative + two_m * self.tau_max
            };
            if norm <= floor {
                return Err(TfError::InvalidArgument(format!(
                    "shift {k} norm {norm} does not exceed its floor {floor}"
                )));
            }
            cumulative += norm;
        }
        Ok(())
    }
}

fn euclid<T: Scalar>(v: &[T]) -> T {
    Float::sqrt(v.iter().map(|&x| x * x).fold(T::zero(), |a, b| a + b))
}

fn quantize_key<T: Scalar>(v: &[T]) -> Vec<i64> {
    let q = T::quantum();
    v.iter()
        .map(|&x| Float::round(x / q).to_i64().expect("coordinate in range"))
        .collect()
}

/// Plans a window for Σ; shifts are the smallest admissible odd-multiple-of-π
/// solutions along each frequency direction.
pub fn plan_window<T: Scalar>(sigma: &[TfPoint<T>]) -> Result<WindowPlan<T>, TfError> {
    plan_window_impl(sigma, None)
}

/// Like [`plan_window`], but searches the parity upward until each shift
/// magnitude is also an integer multiple of `step` (a grid spacing), so that
/// the realized bumps are exact sample translates of one another. Falls back
/// to the unaligned choice when no aligned solution exists within the search
/// budget (irrational step/frequency ratios).
pub fn plan_window_aligned<T: Scalar>(
    sigma: &[TfPoint<T>],
    step: T,
) -> Result<WindowPlan<T>, TfError> {
    plan_window_impl(sigma, Some(step))
}

fn plan_window_impl<T: Scalar>(
    sigma: &[TfPoint<T>],
    align_step: Option<T>,
) -> Result<WindowPlan<T>, TfError> {
    if sigma.is_empty() {
        return Err(TfError::InvalidArgument("sigma must be nonempty".into()));
    }
    let d = sigma[0].dim();
    if sigma.iter().any(|p| p.dim() != d) {
        return Err(TfError::DimensionMismatch {
            expected: d,
            got: sigma.iter().map(|p| p.dim()).find(|&x| x != d).unwrap(),
        });
    }
    {
        let mut keys: Vec<_> = sigma.iter().map(|p| p.key()).collect();
        keys.sort();
        keys.dedup();
        if keys.len() != sigma.len() {
            return Err(TfError::InvalidArgument(
                "sigma points must be pairwise distinct".into(),
            ));
        }
    }

    // Difference set and projections, deduplicated at quantizer resolution.
    let mut delta_set: Vec<TfPoint<T>> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for a in sigma {
        for b in sigma {
            let diff = a.plus(&b.negated());
            if seen.insert(diff.key()) {
                delta_set.push(diff);
            }
        }
    }
    delta_set.sort();

    let mut time_proj: Vec<Vec<T>> = Vec::new();
    let mut freq_proj: Vec<Vec<T>> = Vec::new();
    {
        let mut tseen = std::collections::BTreeSet::new();
        let mut fseen = std::collections::BTreeSet::new();
        for p in &delta_set {
            if tseen.insert(quantize_key(p.t())) {
                time_proj.push(p.t().to_vec());
            }
            if fseen.insert(quantize_key(p.omega())) {
                freq_proj.push(p.omega().to_vec());
            }
        }
    }

    let nonzero_time_norms: Vec<T> = time_proj
        .iter()
        .map(|t| euclid(t))
        .filter(|&n| n > T::zero())
        .collect();
    let tau_min = nonzero_time_norms
        .iter()
        .copied()
        .fold(T::infinity(), Float::min);
    let tau_min = if tau_min.is_finite() {
        tau_min * T::of(0.5)
    } else {
        T::one()
    };
    let tau_max = nonzero_time_norms
        .iter()
        .copied()
        .fold(T::zero(), Float::max);
    let tau_max = if tau_max > T::zero() { tau_max } else { T::one() };

    // Nonzero frequency projections, one representative per ± pair.
    let mut frequencies: Vec<Vec<T>> = Vec::new();
    {
        let mut claimed = std::collections::BTreeSet::new();
        for omega in &freq_proj {
            if euclid(omega).is_zero() {
                continue;
            }
            let key = quantize_key(omega);
            let neg: Vec<i64> = key.iter().map(|&x| -x).collect();
            if claimed.contains(&neg) || !claimed.insert(key) {
                continue;
            }
            frequencies.push(omega.clone());
        }
    }

    let m_count = frequencies.len();
    let pi = T::PI();
    let two_m_tau = T::of_usize(2 * m_count.max(1)) * tau_max;
    let mut shifts: Vec<Vec<T>> = Vec::new();
    let mut parities: Vec<i64> = Vec::new();
    let mut cumulative = T::zero();
    for (k, omega) in frequencies.iter().enumerate() {
        let omega_norm = euclid(omega);
        let floor = if k == 0 { tau_max } else { cumulative + two_m_tau };
        // Smallest parity with (2n+1)π/‖ω‖ strictly beyond the floor, with a
        // small relative margin so near-ties resolve away from the boundary.
        let floor_eff = floor * (T::one() + T::of(1e-9)) + T::of(1e-12);
        let mut parity: i64 = 0;
        while T::from_i64(2 * parity + 1).unwrap() * pi / omega_norm <= floor_eff {
            parity += 1;
        }
        if let Some(step) = align_step {
            // Search for a parity whose shift has every component within
            // float rounding of a step multiple: only such hits keep the
            // odd-multiple-of-π pairing exact after the snap. Near misses
            // are rejected (they would spoil the Fourier zeros), and for
            // directions with no aligned solution the search falls through
            // to the plain choice.
            let mut found = false;
            for trial in 0..200_000i64 {
                let n = parity + trial;
                let s = T::from_i64(2 * n + 1).unwrap() * pi / omega_norm;
                let exact = omega.iter().all(|&w| {
                    let cells = w / omega_norm * s / step;
                    Float::abs(cells - Float::round(cells))
                        <= T::of(1e-12) * Float::max(T::one(), Float::abs(cells))
                });
                if exact {
                    parity = n;
                    found = true;
                    break;
                }
            }
            if found {
                let s = T::from_i64(2 * parity + 1).unwrap() * pi / omega_norm;
                let shift: Vec<T> = omega
                    .iter()
                    .map(|&w| Float::round(w / omega_norm * s / step) * step)
                    .collect();
                cumulative += euclid(&shift);
                shifts.push(shift);
                parities.push(parity);
                continue;
            }
        }
        let s = T::from_i64(2 * parity + 1).unwrap() * pi / omega_norm;
        let shift: Vec<T> = omega.iter().map(|&w| w / omega_norm * s).collect();
        cumulative += euclid(&shift);
        shifts.push(shift);
        parities.push(parity);
    }

    let plan = WindowPlan {
        sigma: sigma.to_vec(),
        delta_set,
        time_proj,
        freq_proj,
        tau_min,
        tau_max,
        frequencies,
        shifts,
        parities,
    };
    plan.verify_invariants()?;
    Ok(plan)
}

/// Rasterizes h_k = 1_E + 1_{t_k + E} on the grid. When the shift is
/// grid-aligned the second bump is an exact sample translate of the first,
/// which is what makes the discrete Fourier zeros exact.
fn bump_pair<T: Scalar>(grid: &Grid<T>, radius: T, shift: &[T]) -> GridFunction<T> {
    let aligned: Option<Vec<i64>> = shift
        .iter()
        .map(|&s| grid.alignment_offset(s))
        .collect();
    let base = GridFunction::from_fn(grid.clone(), |x| {
        let r = euclid(x);
        if r <= radius {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    match aligned {
        Some(offsets) => {
            let n = grid.n_samples() as i64;
            let mut out = base.clone();
            let values = base.values().to_vec();
            for flat in 0..values.len() {
                let mut src = grid.multi_index(flat);
                for (a, &m) in src.iter_mut().zip(&offsets) {
                    *a = ((*a as i64 - m).rem_euclid(n)) as usize;
                }
                let translated = values[grid.flat_index(&src)];
                out.values_mut()[flat] += translated;
            }
            out
        }
        None => GridFunction::from_fn(grid.clone(), |x| {
            let r0 = euclid(x);
            let shifted: Vec<T> = x.iter().zip(shift).map(|(&xi, &si)| xi - si).collect();
            let r1 = euclid(&shifted);
            let mut v = T::zero();
            if r0 <= radius {
                v += T::one();
            }
            if r1 <= radius {
                v += T::one();
            }
            Complex::new(v, T::zero())
        }),
    }
}

/// Circular convolution with continuum scaling h^d, origin kept at x = 0.
fn convolve<T: Scalar>(a: &GridFunction<T>, b: &GridFunction<T>) -> GridFunction<T> {
    let grid = a.grid().clone();
    let d = grid.dim();
    let n = grid.n_samples();
    let mut fa = a.values().to_vec();
    let mut fb = b.values().to_vec();
    fft_all_axes(&grid, &mut fa, true);
    fft_all_axes(&grid, &mut fb, true);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    fft_all_axes(&grid, &mut fa, false);
    let scale = Complex::new(
        Float::powi(grid.spacing(), d as i32) / T::of_usize(n.pow(d as u32)),
        T::zero(),
    );
    // Index convolution puts the origin sum at index 0; rotate each axis by
    // n/2 to move it back to the x = 0 sample.
    let mut out = GridFunction::zeros(grid.clone());
    for flat in 0..fa.len() {
        let mut idx = grid.multi_index(flat);
        for slot in idx.iter_mut() {
            *slot = (*slot + n / 2) % n;
        }
        out.values_mut()[flat] = fa[grid.flat_index(&idx)] * scale;
    }
    out
}

fn fft_all_axes<T: Scalar>(grid: &Grid<T>, values: &mut [Complex<T>], forward: bool) {
    let n = grid.n_samples();
    let mut planner = FftPlanner::new();
    let fft = if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    };
    let d = grid.dim();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let lines = values.len() / n;
        for line in 0..lines {
            let block = line / stride;
            let offset = line % stride;
            let base = block * stride * n + offset;
            for (k, slot) in buf.iter_mut().enumerate() {
                *slot = values[base + k * stride];
            }
            fft.process(&mut buf);
            for (k, slot) in buf.iter().enumerate() {
                values[base + k * stride] = *slot;
            }
        }
    }
}

/// Realizes the planned window on a grid: g = √(h₁ * … * h_M), normalized.
/// M = 0 degenerates to the normalized indicator of E, M = 1 to √h₁.
pub fn realize_window<T: Scalar>(
    plan: &WindowPlan<T>,
    grid: &Grid<T>,
) -> Result<GridFunction<T>, TfError> {
    let required = plan.required_half_length();
    if grid.half_length() < required {
        return Err(TfError::GridTooSmall {
            required_l: required.to_f64().unwrap_or(f64::NAN),
            actual_l: grid.half_length().to_f64().unwrap_or(f64::NAN),
        });
    }
    let d = plan.sigma[0].dim();
    if grid.dim() != d {
        return Err(TfError::DimensionMismatch {
            expected: d,
            got: grid.dim(),
        });
    }
    let m_count = plan.shifts.len();
    let radius = plan.tau_min / T::of_usize(2 * m_count.max(1));

    let mut conv = if m_count == 0 {
        GridFunction::from_fn(grid.clone(), |x| {
            if euclid(x) <= radius {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    } else {
        bump_pair(grid, radius, &plan.shifts[0])
    };
    for shift in plan.shifts.iter().skip(1) {
        let h_k = bump_pair(grid, radius, shift);
        conv = convolve(&conv, &h_k);
    }

    // Convolutions of nonnegative bumps are nonnegative; clear FFT noise
    // before the square root.
    let mut g = conv;
    for v in g.values_mut() {
        let re = Float::max(v.re, T::zero());
        *v = Complex::new(Float::sqrt(re), T::zero());
    }
    let norm = g.norm();
    if norm.is_zero() {
        return Err(TfError::InvalidGrid(
            "window vanished on the grid; resolution too coarse for the bump radius".into(),
        ));
    }
    g.scale(Complex::new(T::one() / norm, T::zero()));
    Ok(g)
}

/// |ℱ_grid(h_k)(ω_k)| for each planned shift, via direct summation at the
/// exact frequency (no bin rounding).
pub fn fourier_zero_residuals<T: Scalar>(
    plan: &WindowPlan<T>,
    grid: &Grid<T>,
) -> Result<Vec<T>, TfError> {
    let m_count = plan.shifts.len();
    let radius = plan.tau_min / T::of_usize(2 * m_count.max(1));
    let d = grid.dim();
    let hd = Float::powi(grid.spacing(), d as i32);
    let fourier_scale = hd / Float::powf(T::of(2.0) * T::PI(), T::of_usize(d) / T::of(2.0));
    plan.shifts
        .iter()
        .zip(&plan.frequencies)
        .map(|(shift, omega)| {
            let h_k = bump_pair(grid, radius, shift);
            let mut acc = Kahan::default();
            for (flat, v) in h_k.values().iter().enumerate() {
                if v.re.is_zero() {
                    continue;
                }
                let x = grid.position(flat);
                let dot = x
                    .iter()
                    .zip(omega)
                    .map(|(&xi, &wi)| xi * wi)
                    .fold(T::zero(), |a, b| a + b);
                acc.add(*v * Complex::from_polar(T::one(), -dot));
            }
            Ok(acc.value().norm() * fourier_scale)
        })
        .collect()
}

/// Gram matrix report for {U_σ g}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GramReport<T> {
    pub size: usize,
    pub max_deviation: T,
    pub pass: bool,
    /// Entries as (re, im), row-major.
    pub entries: Vec<Vec<(T, T)>>,
}

/// Assembles G_{jk} = ⟨U_{σ_j} g, U_{σ_k} g⟩ on the grid and compares with
/// the identity. Aligned shifts are used whenever the time components allow.
pub fn verify_orthonormal<T: Scalar>(
    g: &GridFunction<T>,
    sigma: &[TfPoint<T>],
    tol: T,
) -> Result<GramReport<T>, TfError> {
    let shifted: Result<Vec<GridFunction<T>>, TfError> = sigma
        .iter()
        .map(|p| {
            let aligned = p
                .t()
                .iter()
                .all(|&ti| g.grid().alignment_offset(ti).is_some());
            g.shifted(
                p,
                if aligned {
                    ShiftMode::Aligned
                } else {
                    ShiftMode::Bandlimited
                },
            )
        })
        .collect();
    let shifted = shifted?;
    let n = sigma.len();
    let mut entries = vec![vec![(T::zero(), T::zero()); n]; n];
    let mut max_dev = T::zero();
    for j in 0..n {
        for k in 0..n {
            let ip = shifted[j].inner(&shifted[k]);
            entries[j][k] = (ip.re, ip.im);
            let target = if j == k {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            };
            max_dev = Float::max(max_dev, (ip - target).norm());
        }
    }
    Ok(GramReport {
        size: n,
        max_deviation: max_dev,
        pass: max_dev <= tol,
        entries,
    })
}
