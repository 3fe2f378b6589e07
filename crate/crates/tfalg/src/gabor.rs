//! Gabor-frame trace averages and coefficient recovery.
//!
//! A Gabor system g_{m,n} = U_{βn, 2παm} g with a dual window g̃ turns the
//! 0-coefficient functional γ(Σ c_λ U_λ) = c_0 into a computable limit of
//! lattice averages
//!
//!   a_{M,N}(T) = (αβ)^{−d} (2M+1)^{−d} (2N+1)^{−d} Σ_{|m|≤M, |n|≤N}
//!                ⟨T g_{m,n}, g̃_{m,n}⟩,
//!
//! which converge to γ(T): exactly 1 at λ = 0, killed by biorthogonality on
//! adjoint-lattice points, and averaged away at Dirichlet-kernel rate
//! everywhere else. On the grid the lattice is finite and periodic, so the
//! frame operator is assembled exactly and the canonical dual g̃ = S⁻¹g comes
//! from a Hermitian solve.

use num_complex::Complex;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::TfError;
use crate::operator::TfOperator;
use crate::oracle::{Grid, GridFunction, ShiftMode};
use crate::point::TfPoint;
use crate::scalar::{Kahan, Scalar};

/// A Gabor frame on a grid: lattice parameters, window, canonical dual.
#[derive(Clone, Debug)]
pub struct GaborSystem<T: Scalar> {
    grid: Grid<T>,
    alpha: T,
    beta: T,
    window: GridFunction<T>,
    dual: GridFunction<T>,
    /// Time lattice step in samples, p = β/h.
    step_samples: usize,
    /// Frequency lattice step in fundamental bins π/L, q = 2Lα.
    step_bins: usize,
}

impl<T: Scalar> GaborSystem<T> {
    /// Builds the system with an L²-normalized periodized Gaussian window
    /// matched to the lattice aspect ratio, assembles the frame operator of
    /// the full (finite, periodic) lattice, solves for the canonical dual,
    /// and verifies frame reproduction before returning.
    pub fn build(grid: Grid<T>, alpha: T, beta: T) -> Result<Self, TfError> {
        if alpha <= T::zero() || beta <= T::zero() {
            return Err(TfError::LatticeIncompatible(
                "alpha and beta must be positive".into(),
            ));
        }
        if alpha * beta >= T::one() {
            return Err(TfError::LatticeIncompatible(format!(
                "need strict oversampling alpha*beta < 1, got {}",
                alpha * beta
            )));
        }
        let n = grid.n_samples();
        let h = grid.spacing();
        let two_l = grid.half_length() + grid.half_length();

        let p_real = beta / h;
        let p = Float::round(p_real);
        if Float::abs(p_real - p) > T::of(1e-9) || p < T::one() {
            return Err(TfError::LatticeIncompatible(format!(
                "beta = {beta} is not an integer multiple of the spacing {h}"
            )));
        }
        let q_real = alpha * two_l;
        let q = Float::round(q_real);
        if Float::abs(q_real - q) > T::of(1e-9) || q < T::one() {
            return Err(TfError::LatticeIncompatible("2*pi*alpha is not an integer multiple of the fundamental frequency pi/L".to_string()));
        }
        let p = p.to_usize().unwrap();
        let q = q.to_usize().unwrap();
        if !n.is_multiple_of(p) || !n.is_multiple_of(q) {
            return Err(TfError::LatticeIncompatible(format!(
                "lattice steps (p = {p} samples, q = {q} bins) must divide n = {n}"
            )));
        }

        // Width matched to the lattice: sigma^2 = time spacing / freq spacing.
        let sigma = Float::sqrt(beta / (T::of(2.0) * T::PI() * alpha));
        let window = periodized_gaussian(&grid, sigma);

        let dual = canonical_dual(&grid, &window, p, q)?;

        let system = Self {
            grid,
            alpha,
            beta,
            window,
            dual,
            step_samples: p,
            step_bins: q,
        };
        system.verify_reproduction(T::of(1e-6))?;
        Ok(system)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn window(&self) -> &GridFunction<T> {
        &self.window
    }

    pub fn dual(&self) -> &GridFunction<T> {
        &self.dual
    }

    /// The lattice point (βn, 2παm) as a TfPoint, for integer vectors m, n.
    pub fn lattice_point(&self, m: &[i64], n: &[i64]) -> Result<TfPoint<T>, TfError> {
        let d = self.grid.dim();
        if m.len() != d || n.len() != d {
            return Err(TfError::DimensionMismatch {
                expected: d,
                got: m.len().max(n.len()),
            });
        }
        let t: Vec<T> = n
            .iter()
            .map(|&ni| self.beta * T::from_i64(ni).unwrap())
            .collect();
        let omega: Vec<T> = m
            .iter()
            .map(|&mi| T::of(2.0) * T::PI() * self.alpha * T::from_i64(mi).unwrap())
            .collect();
        TfPoint::new(t, omega)
    }

    /// g_{m,n} = U_{βn, 2παm} g — exact on the grid (aligned shift, exact
    /// diagonal modulation).
    pub fn atom(&self, m: &[i64], n: &[i64]) -> Result<GridFunction<T>, TfError> {
        self.window
            .shifted(&self.lattice_point(m, n)?, ShiftMode::Aligned)
    }

    fn dual_atom(&self, m: &[i64], n: &[i64]) -> Result<GridFunction<T>, TfError> {
        self.dual
            .shifted(&self.lattice_point(m, n)?, ShiftMode::Aligned)
    }

    /// Coordinate beyond which window samples fall below 1e−12 of the peak.
    pub fn window_effective_radius(&self) -> T {
        let linf = self
            .window
            .values()
            .iter()
            .map(|v| v.norm())
            .fold(T::zero(), Float::max);
        let cut = linf * T::of(1e-12);
        let mut radius = T::zero();
        for (flat, v) in self.window.values().iter().enumerate() {
            if v.norm() >= cut {
                let x = self.grid.position(flat);
                let sup = x.iter().map(|&c| Float::abs(c)).fold(T::zero(), Float::max);
                radius = Float::max(radius, sup);
            }
        }
        radius
    }

    /// Σ_{m,n over the full periodic lattice} ⟨f, g_{m,n}⟩ g̃_{m,n} must
    /// reproduce f; checked on a displaced Gaussian probe.
    fn verify_reproduction(&self, tol: T) -> Result<(), TfError> {
        let h = self.grid.spacing();
        let probe = {
            let shift = h * T::of_usize(self.grid.n_samples() / 16);
            GridFunction::from_fn(self.grid.clone(), |x| {
                let r2 = x
                    .iter()
                    .map(|&xi| (xi - shift) * (xi - shift))
                    .fold(T::zero(), |a, b| a + b);
                Complex::new(Float::exp(-r2), T::zero())
            })
        };
        let mut recon = GridFunction::zeros(self.grid.clone());
        let d = self.grid.dim();
        let n_time = self.grid.n_samples() / self.step_samples;
        let n_freq = self.grid.n_samples() / self.step_bins;
        let mut m_idx = vec![0i64; d];
        let mut n_idx = vec![0i64; d];
        loop {
            loop {
                let atom = self.atom(&m_idx, &n_idx)?;
                let coeff = probe.inner(&atom);
                let datom = self.dual_atom(&m_idx, &n_idx)?;
                recon.add_scaled(coeff, &datom);
                if !increment(&mut n_idx, n_time as i64) {
                    break;
                }
            }
            if !increment(&mut m_idx, n_freq as i64) {
                break;
            }
        }
        let err = recon.sub(&probe).norm() / probe.norm();
        if err > tol {
            return Err(TfError::IllConditionedFrame(format!(
                "frame reproduction error {err} exceeds {tol}"
            )));
        }
        Ok(())
    }

    /// Canonical tight window S^{−1/2} g (eigendecomposition of the frame
    /// operator; meant for small grids).
    pub fn tight_window(&self) -> Result<GridFunction<T>, TfError> {
        let s = frame_matrix(&self.grid, &self.window, self.step_samples, self.step_bins);
        let eig = s.symmetric_eigen();
        let n_total = self.grid.total_points();
        let mut inv_sqrt = nalgebra::DMatrix::from_element(
            n_total,
            n_total,
            Complex::new(T::zero(), T::zero()),
        );
        for (i, &ev) in eig.eigenvalues.iter().enumerate() {
            if ev <= T::zero() {
                return Err(TfError::IllConditionedFrame(
                    "frame operator not positive definite".into(),
                ));
            }
            let scale = Complex::new(T::one() / Float::sqrt(ev), T::zero());
            let col = eig.eigenvectors.column(i);
            for r in 0..n_total {
                for c in 0..n_total {
                    inv_sqrt[(r, c)] += col[r] * scale * col[c].conj();
                }
            }
        }
        let gvec = nalgebra::DVector::from_column_slice(self.window.values());
        let tight = &inv_sqrt * gvec;
        let mut out = GridFunction::from_values(self.grid.clone(), tight.as_slice().to_vec())?;
        let norm = out.norm();
        out.scale(Complex::new(T::one() / norm, T::zero()));
        Ok(out)
    }
}

fn increment(idx: &mut [i64], modulus: i64) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < modulus {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Samples ∏_i Σ_j exp(−(x_i + 2L·j)²/(2σ²)) and normalizes on the grid.
fn periodized_gaussian<T: Scalar>(grid: &Grid<T>, sigma: T) -> GridFunction<T> {
    let two_l = grid.half_length() + grid.half_length();
    let mut g = GridFunction::from_fn(grid.clone(), |x| {
        let mut value = T::one();
        for &xi in x {
            let mut axis = T::zero();
            for j in -1i32..=1 {
                let shifted = xi + two_l * T::of(j as f64);
                axis += Float::exp(-shifted * shifted / (T::of(2.0) * sigma * sigma));
            }
            value *= axis;
        }
        Complex::new(value, T::zero())
    });
    let norm = g.norm();
    g.scale(Complex::new(T::one() / norm, T::zero()));
    g
}

/// Dense frame operator of the full periodic lattice, in the h-weighted
/// inner product. The sum over all modulations collapses to a residue
/// constraint: S_{jk} ≠ 0 only when j ≡ k mod (n/q) along every axis, with
///
///   S_{jk} = h^d (n/q)^d Σ_{time translates l} g^{(l)}_j conj(g^{(l)}_k).
fn frame_matrix<T: Scalar>(
    grid: &Grid<T>,
    window: &GridFunction<T>,
    p: usize,
    q: usize,
) -> nalgebra::DMatrix<Complex<T>> {
    let d = grid.dim();
    let n = grid.n_samples();
    let n_total = grid.total_points();
    let period = n / q;
    let n_time = n / p;

    let hd = Float::powi(grid.spacing(), d as i32);
    let freq_count = Float::powi(T::of_usize(period), d as i32);
    let scale = Complex::new(hd * freq_count, T::zero());

    let zero = Complex::new(T::zero(), T::zero());
    let mut s = nalgebra::DMatrix::from_element(n_total, n_total, zero);

    // Precompute all time translates of the window (cyclic sample shifts).
    let mut translates: Vec<Vec<Complex<T>>> = Vec::new();
    let mut shift_idx = vec![0usize; d];
    loop {
        let mut values = vec![zero; n_total];
        for (flat, slot) in values.iter_mut().enumerate() {
            let mut src = grid.multi_index(flat);
            for (a, &sh) in src.iter_mut().zip(&shift_idx) {
                *a = (*a + n - (sh * p) % n) % n;
            }
            *slot = window.values()[grid.flat_index(&src)];
        }
        translates.push(values);
        let mut done = true;
        for slot in shift_idx.iter_mut().rev() {
            *slot += 1;
            if *slot < n_time {
                done = false;
                break;
            }
            *slot = 0;
        }
        if done {
            break;
        }
    }

    for j in 0..n_total {
        let jm = grid.multi_index(j);
        // Enumerate k in the same residue class mod `period` along each axis.
        let mut offsets = vec![0usize; d];
        loop {
            let km: Vec<usize> = jm
                .iter()
                .zip(&offsets)
                .map(|(&ji, &o)| (ji % period + o * period) % n)
                .collect();
            let k = grid.flat_index(&km);
            let mut acc = Kahan::default();
            for tr in &translates {
                acc.add(tr[j] * tr[k].conj());
            }
            s[(j, k)] = acc.value() * scale;
            let mut done = true;
            for slot in offsets.iter_mut().rev() {
                *slot += 1;
                if *slot < q {
                    done = false;
                    break;
                }
                *slot = 0;
            }
            if done {
                break;
            }
        }
    }
    s
}

/// Solves S g̃ = g for the canonical dual window.
fn canonical_dual<T: Scalar>(
    grid: &Grid<T>,
    window: &GridFunction<T>,
    p: usize,
    q: usize,
) -> Result<GridFunction<T>, TfError> {
    let s = frame_matrix(grid, window, p, q);
    let chol = s.clone().cholesky().ok_or_else(|| {
        TfError::IllConditionedFrame("frame operator Cholesky failed (alpha*beta too close to 1?)".into())
    })?;
    let g = nalgebra::DVector::from_column_slice(window.values());
    let dual = chol.solve(&g);
    GridFunction::from_values(grid.clone(), dual.as_slice().to_vec())
}

// ---------------------------------------------------------------------------
// Trace estimation
// ---------------------------------------------------------------------------

/// Finite lattice average a_{M,N}(T) together with its convergence history.
#[derive(Clone, Debug)]
pub struct TraceEstimate<T: Scalar> {
    pub value: Complex<T>,
    pub m_trunc: usize,
    pub n_trunc: usize,
    /// Nested partial averages (M', N', a_{M',N'}) for Cauchy diagnostics.
    pub convergence_trace: Vec<(usize, usize, Complex<T>)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceEstimateRecord<T> {
    pub value: (T, T),
    #[serde(rename = "M")]
    pub m_trunc: usize,
    #[serde(rename = "N")]
    pub n_trunc: usize,
    pub trace: Vec<(usize, usize, T, T)>,
}

impl<T: Scalar> TraceEstimate<T> {
    pub fn to_record(&self) -> TraceEstimateRecord<T> {
        TraceEstimateRecord {
            value: (self.value.re, self.value.im),
            m_trunc: self.m_trunc,
            n_trunc: self.n_trunc,
            trace: self
                .convergence_trace
                .iter()
                .map(|&(m, n, v)| (m, n, v.re, v.im))
                .collect(),
        }
    }
}

/// Validates that the truncation window keeps every translate's effective
/// support inside the grid, then averages ⟨T g_{m,n}, g̃_{m,n}⟩ over the
/// box |m| ≤ m_max, |n| ≤ n_max.
pub fn trace_estimate<T: Scalar>(
    op: &TfOperator<T>,
    system: &GaborSystem<T>,
    m_max: usize,
    n_max: usize,
) -> Result<TraceEstimate<T>, TfError> {
    let grid = system.grid();
    let d = grid.dim();
    if op.dim() != d {
        return Err(TfError::DimensionMismatch {
            expected: d,
            got: op.dim(),
        });
    }

    // Reliable-region check: lattice time translates plus the operator's own
    // time shifts must keep the window support inside [−L, L).
    let window_radius = system.window_effective_radius();
    let op_time_reach = op
        .iter_terms()
        .map(|(p, _)| {
            p.t().iter().map(|&ti| Float::abs(ti)).fold(T::zero(), Float::max)
        })
        .fold(T::zero(), Float::max);
    let reach = system.beta() * T::of_usize(n_max) + window_radius + op_time_reach;
    if reach > grid.half_length() {
        return Err(TfError::TruncationWindowExceedsGrid(format!(
            "time reach {reach} exceeds L = {}; shrink n_max or enlarge the grid",
            grid.half_length()
        )));
    }

    let m_count = 2 * m_max + 1;
    let n_count = 2 * n_max + 1;
    let total = m_count.pow(d as u32) * n_count.pow(d as u32);
    let mut samples: Vec<(Vec<i64>, Vec<i64>, Complex<T>)> = Vec::with_capacity(total);

    // One fractional shift of the window per operator term; the remaining
    // lattice translate β·n is sample-aligned, and both shifts are diagonal
    // in the discrete spectrum, so S_{t_λ + βn} = S_{βn} S_{t_λ} holds
    // exactly on the grid. Everything inside the double loop is then an
    // aligned shift, a diagonal phase, and an inner product.
    let term_bank: Vec<(TfPoint<T>, Complex<T>, GridFunction<T>)> = op
        .iter_terms()
        .map(|(point, coeff)| {
            let pure_time = TfPoint::new(point.t().to_vec(), vec![T::zero(); d])?;
            let shifted = system.window.shifted(&pure_time, ShiftMode::Bandlimited)?;
            Ok((point, coeff, shifted))
        })
        .collect::<Result<_, TfError>>()?;

    let two_pi_alpha = T::of(2.0) * T::PI() * system.alpha();
    let mut m_idx = vec![-(m_max as i64); d];
    loop {
        let lattice_omega: Vec<T> = m_idx
            .iter()
            .map(|&mi| two_pi_alpha * T::from_i64(mi).unwrap())
            .collect();
        let mut n_idx = vec![-(n_max as i64); d];
        loop {
            let translate = system.lattice_point(&m_idx, &n_idx)?;
            let time_only =
                TfPoint::new(translate.t().to_vec(), vec![T::zero(); d])?;
            let datom = system.dual_atom(&m_idx, &n_idx)?;

            // ⟨T g_{m,n}, g̃_{m,n}⟩ assembled term by term:
            // U_λ U_{βn,2παm} g = e^{−i⟨t_λ, 2παm⟩} M_{ω_λ+2παm} S_{βn} (S_{t_λ} g).
            let mut value = Kahan::default();
            for (point, coeff, bank) in &term_bank {
                let mut shifted = bank.shifted(&time_only, ShiftMode::Aligned)?;
                let omega_total: Vec<T> = point
                    .omega()
                    .iter()
                    .zip(&lattice_omega)
                    .map(|(&w, &lw)| w + lw)
                    .collect();
                shifted.modulate(&omega_total);
                let phase = point
                    .t()
                    .iter()
                    .zip(&lattice_omega)
                    .map(|(&ti, &lw)| ti * lw)
                    .fold(T::zero(), |a, b| a + b);
                let commutation = Complex::from_polar(T::one(), -phase);
                value.add(*coeff * commutation * shifted.inner(&datom));
            }
            samples.push((m_idx.clone(), n_idx.clone(), value.value()));
            if !increment_signed(&mut n_idx, n_max as i64) {
                break;
            }
        }
        if !increment_signed(&mut m_idx, m_max as i64) {
            break;
        }
    }

    let inv_density = Float::powi(T::one() / (system.alpha() * system.beta()), d as i32);
    let average = |m_cut: usize, n_cut: usize| -> Complex<T> {
        let mut acc = Kahan::default();
        let mut count = 0usize;
        for (m, n, s) in &samples {
            if m.iter().all(|&v| v.unsigned_abs() as usize <= m_cut)
                && n.iter().all(|&v| v.unsigned_abs() as usize <= n_cut)
            {
                acc.add(*s);
                count += 1;
            }
        }
        acc.value() * Complex::new(inv_density / T::of_usize(count), T::zero())
    };

    let mut convergence_trace = Vec::new();
    let mut cut = 1usize;
    while cut < m_max.max(n_max) {
        convergence_trace.push((cut.min(m_max), cut.min(n_max), average(cut.min(m_max), cut.min(n_max))));
        cut *= 2;
    }
    let value = average(m_max, n_max);
    convergence_trace.push((m_max, n_max, value));

    Ok(TraceEstimate {
        value,
        m_trunc: m_max,
        n_trunc: n_max,
        convergence_trace,
    })
}

fn increment_signed(idx: &mut [i64], max: i64) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot <= max {
            return true;
        }
        *slot = -max;
    }
    false
}

/// Recovers c_λ = γ(U_λ* T) through the trace estimator.
pub fn recover_coefficient<T: Scalar>(
    op: &TfOperator<T>,
    lambda: &TfPoint<T>,
    system: &GaborSystem<T>,
    m_max: usize,
    n_max: usize,
) -> Result<Complex<T>, TfError> {
    let probe = TfOperator::unit(lambda.clone()).adjoint();
    let shifted = probe.compose(op)?;
    Ok(trace_estimate(&shifted, system, m_max, n_max)?.value)
}

/// Deviations of the estimator from the algebraic trace identities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceChecksReport<T> {
    /// |γ(ab) − γ(ba)|.
    pub commutator_gap: T,
    /// |γ(a*a) − Σ|c_λ|²|.
    pub faithful_gap: T,
    /// Re γ(a*a) — should be ≥ 0 up to estimator error.
    pub positivity: T,
    /// Σ|c_λ|² for reference.
    pub coefficient_energy: T,
}

pub fn trace_identities_check<T: Scalar>(
    a: &TfOperator<T>,
    b: &TfOperator<T>,
    system: &GaborSystem<T>,
    m_max: usize,
    n_max: usize,
) -> Result<TraceChecksReport<T>, TfError> {
    let ab = a.compose(b)?;
    let ba = b.compose(a)?;
    let gamma_ab = trace_estimate(&ab, system, m_max, n_max)?.value;
    let gamma_ba = trace_estimate(&ba, system, m_max, n_max)?.value;

    let a_star_a = a.adjoint().compose(a)?;
    let gamma_pos = trace_estimate(&a_star_a, system, m_max, n_max)?.value;
    let energy = {
        let norms = a.coefficient_norms();
        norms.l2 * norms.l2
    };

    Ok(TraceChecksReport {
        commutator_gap: (gamma_ab - gamma_ba).norm(),
        faithful_gap: (gamma_pos - Complex::new(energy, T::zero())).norm(),
        positivity: gamma_pos.re,
        coefficient_energy: energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system() -> GaborSystem<f64> {
        let grid = Grid::new(1, 256, 8.0).unwrap();
        GaborSystem::build(grid, 0.5, 0.5).unwrap()
    }

    #[test]
    fn build_validates_lattice() {
        let grid = Grid::new(1, 256, 8.0).unwrap();
        assert!(GaborSystem::build(grid.clone(), 2.0, 0.6).is_err()); // alpha*beta > 1
        assert!(GaborSystem::build(grid, 0.5, 0.3).is_err()); // beta off-grid
    }

    #[test]
    fn window_and_dual_pair_to_density() {
        let sys = system();
        // Finite Wexler-Raz: <g, dual> = (alpha*beta)^d exactly.
        let pairing = sys.window().inner(sys.dual());
        assert!((pairing.re - 0.25).abs() < 1e-10, "pairing {pairing}");
        assert!(pairing.im.abs() < 1e-12);
    }

    #[test]
    fn biorthogonality_on_adjoint_lattice() {
        let sys = system();
        // Adjoint lattice: time shifts K/alpha, frequency shifts 2*pi*J/beta.
        for j in -1i64..=1 {
            for k in -1i64..=1 {
                let point = TfPoint::new_1d(
                    k as f64 / sys.alpha(),
                    2.0 * std::f64::consts::PI * j as f64 / sys.beta(),
                )
                .unwrap();
                let shifted = sys.window().shifted(&point, ShiftMode::Aligned).unwrap();
                let ip = shifted.inner(sys.dual());
                let expected = if j == 0 && k == 0 { 0.25 } else { 0.0 };
                assert!(
                    (ip.norm() - expected).abs() < 1e-5,
                    "(J,K)=({j},{k}): {ip}"
                );
            }
        }
    }

    #[test]
    fn tight_window_has_identity_frame_operator() {
        let grid = Grid::new(1, 256, 8.0).unwrap();
        let sys = GaborSystem::build(grid.clone(), 0.5, 0.5).unwrap();
        let tight = sys.tight_window().unwrap();
        let s = frame_matrix(&grid, &tight, sys.step_samples, sys.step_bins);
        // S for the tightened window is a multiple of the identity; the
        // multiplier is the frame redundancy 1/(alpha*beta).
        let n_total = grid.total_points();
        let mut max_dev: f64 = 0.0;
        for j in 0..n_total {
            for k in 0..n_total {
                let expect = if j == k { 4.0 } else { 0.0 };
                max_dev = max_dev.max((s[(j, k)] - Complex::new(expect, 0.0)).norm());
            }
        }
        assert!(max_dev < 1e-8, "max deviation {max_dev}");
    }

    #[test]
    fn trace_of_identity_is_one() {
        let sys = system();
        let id = TfOperator::identity(1);
        let est = trace_estimate(&id, &sys, 4, 4).unwrap();
        assert!((est.value.re - 1.0).abs() < 1e-9, "{}", est.value);
        assert!(est.value.im.abs() < 1e-10);
    }

    #[test]
    fn trace_window_validation() {
        let sys = system();
        let id = TfOperator::identity(1);
        // beta*n_max + window radius exceeds L = 8 for n_max = 16.
        assert!(matches!(
            trace_estimate(&id, &sys, 2, 16),
            Err(TfError::TruncationWindowExceedsGrid(_))
        ));
    }

    #[test]
    fn trace_kills_adjoint_lattice_point() {
        let sys = system();
        // lambda = (2, 4*pi) = (K/alpha, 2*pi*J/beta) with K = 1, J = 1.
        let lambda = TfPoint::new_1d(2.0, 4.0 * std::f64::consts::PI).unwrap();
        let op = TfOperator::unit(lambda);
        let est = trace_estimate(&op, &sys, 4, 4).unwrap();
        assert!(est.value.norm() < 1e-8, "{}", est.value);
    }

    #[test]
    fn trace_decays_off_lattice() {
        let sys = system();
        let op = TfOperator::unit(TfPoint::new_1d(0.37, 1.13).unwrap());
        let small = trace_estimate(&op, &sys, 2, 2).unwrap();
        let large = trace_estimate(&op, &sys, 8, 8).unwrap();
        assert!(large.value.norm() < small.value.norm());
        assert!(large.value.norm() < 0.1);
    }

    #[test]
    fn recover_simple_coefficients() {
        let sys = system();
        let lambda = TfPoint::new_1d(1.0, std::f64::consts::PI).unwrap();
        let op = TfOperator::from_terms(
            1,
            vec![
                (TfPoint::zero(1), Complex::new(2.0, 0.0)),
                (lambda.clone(), Complex::new(0.0, 1.0)),
            ],
        )
        .unwrap();
        let c = recover_coefficient(&op, &lambda, &sys, 8, 8).unwrap();
        assert!((c - Complex::new(0.0, 1.0)).norm() < 1e-2, "{c}");
        // Off-support probe kept away from the near-resonant frequencies
        // (βω/2π close to an integer) where the Dirichlet averages decay
        // slowest.
        let zero = recover_coefficient(&op, &TfPoint::new_1d(0.61, 2.3).unwrap(), &sys, 8, 8)
            .unwrap();
        assert!(zero.norm() < 1e-2, "{zero}");
        let origin = recover_coefficient(&TfOperator::identity(1), &TfPoint::zero(1), &sys, 4, 4)
            .unwrap();
        assert!((origin.re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tracial_identity_on_noncommuting_pair() {
        // ab = −U_{(1,π)} and ba = +U_{(1,π)}: both traces vanish in the
        // limit even though the products differ; at finite truncation the
        // gap is a Dirichlet remainder shrinking like 1/(MN).
        let grid = Grid::with_cap(1, 512, 16.0, 8192).unwrap();
        let sys = GaborSystem::build(grid, 0.5, 0.5).unwrap();
        let a = TfOperator::unit(TfPoint::new_1d(1.0, 0.0).unwrap());
        let b = TfOperator::unit(TfPoint::new_1d(0.0, std::f64::consts::PI).unwrap());
        let report = trace_identities_check(&a, &b, &sys, 12, 12).unwrap();
        assert!(report.commutator_gap < 5e-3, "gap {}", report.commutator_gap);

        let zero = TfOperator::zero(1);
        let empty = trace_identities_check(&zero, &zero, &sys, 2, 2).unwrap();
        assert_eq!(empty.positivity, 0.0);
        assert_eq!(empty.coefficient_energy, 0.0);
    }
}
