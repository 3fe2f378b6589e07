//! Dense matrix assembly and spectral estimation on the grid.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::TfError;
use crate::operator::{TfOperator, DEFAULT_TERM_CAP};
use crate::scalar::Scalar;
use crate::weight::Weight;

use super::{Grid, GridFunction, ShiftMode};

/// Multiplicative safety margin applied to frame-bound estimates.
pub const DEFAULT_FRAME_MARGIN: f64 = 0.01;

/// Assembles the dense matrix M with M·vec(f) = vec(Σ c_λ U_λ f).
///
/// In aligned mode each term contributes a permutation × diagonal-phase
/// pattern directly; bandlimited mode applies the operator to every basis
/// vector.
pub fn assemble<T: Scalar>(
    op: &TfOperator<T>,
    grid: &Grid<T>,
    mode: ShiftMode,
) -> Result<DMatrix<Complex<T>>, TfError> {
    if op.dim() != grid.dim() {
        return Err(TfError::DimensionMismatch {
            expected: grid.dim(),
            got: op.dim(),
        });
    }
    let n_total = grid.total_points();
    let zero = Complex::new(T::zero(), T::zero());
    let mut matrix = DMatrix::from_element(n_total, n_total, zero);

    match mode {
        ShiftMode::Aligned => {
            let n = grid.n_samples() as i64;
            for (point, coeff) in op.iter_terms() {
                let offsets: Result<Vec<i64>, TfError> = point
                    .t()
                    .iter()
                    .map(|&ti| {
                        grid.alignment_offset(ti).ok_or(TfError::MisalignedShift {
                            shift: num_traits::ToPrimitive::to_f64(&ti).unwrap_or(f64::NAN),
                            spacing: num_traits::ToPrimitive::to_f64(&grid.spacing())
                                .unwrap_or(f64::NAN),
                        })
                    })
                    .collect();
                let offsets = offsets?;
                for col in 0..n_total {
                    let mut idx = grid.multi_index(col);
                    for (a, &m) in idx.iter_mut().zip(&offsets) {
                        *a = ((*a as i64 + m).rem_euclid(n)) as usize;
                    }
                    let row = grid.flat_index(&idx);
                    let x = grid.position(row);
                    let dot = x
                        .iter()
                        .zip(point.omega())
                        .map(|(&xi, &wi)| xi * wi)
                        .fold(T::zero(), |acc, v| acc + v);
                    matrix[(row, col)] += coeff * Complex::from_polar(T::one(), dot);
                }
            }
        }
        ShiftMode::Bandlimited => {
            for col in 0..n_total {
                let mut basis = GridFunction::zeros(grid.clone());
                basis.values_mut()[col] = Complex::new(T::one(), T::zero());
                let image = basis.apply_operator(op, ShiftMode::Bandlimited)?;
                for row in 0..n_total {
                    matrix[(row, col)] = image.values()[row];
                }
            }
        }
    }
    Ok(matrix)
}

/// Result of the randomized power iteration for ‖T‖_{B(L²)}.
#[derive(Clone, Copy, Debug)]
pub struct OpNormEstimate<T> {
    pub value: T,
    pub converged: bool,
    pub iterations: usize,
}

/// Largest singular value of the grid operator via power iteration on T*T,
/// matrix-free, with fixed-seed randomized restarts. Targets 1e-6 relative
/// accuracy; returns the best estimate with `converged = false` when the
/// Rayleigh quotient has not settled within `iters` steps.
pub fn operator_norm_estimate<T: Scalar>(
    op: &TfOperator<T>,
    grid: &Grid<T>,
    iters: usize,
) -> Result<OpNormEstimate<T>, TfError> {
    if op.is_empty() {
        return Ok(OpNormEstimate {
            value: T::zero(),
            converged: true,
            iterations: 0,
        });
    }
    let adjoint = op.adjoint();
    let n_total = grid.total_points();
    let tol = T::of(1e-9);
    let mut best = T::zero();
    let mut best_converged = false;
    let mut best_iters = 0;

    for restart in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7f4a_9c21 ^ restart);
        let values: Vec<Complex<T>> = (0..n_total)
            .map(|_| {
                Complex::new(
                    T::of(rng.gen_range(-1.0..1.0)),
                    T::of(rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        let mut v = GridFunction::from_values(grid.clone(), values)?;
        let norm = v.norm();
        v.scale(Complex::new(T::one() / norm, T::zero()));

        let mut rayleigh = T::zero();
        let mut converged = false;
        let mut used = 0;
        for it in 0..iters {
            let tv = v.apply_operator(op, ShiftMode::Bandlimited)?;
            let w = tv.apply_operator(&adjoint, ShiftMode::Bandlimited)?;
            // ⟨T*T v, v⟩ = ‖Tv‖² for unit v.
            let next = Float::abs(w.inner(&v).re);
            let wnorm = w.norm();
            used = it + 1;
            if wnorm.is_zero() {
                rayleigh = T::zero();
                converged = true;
                break;
            }
            let rel = Float::abs(next - rayleigh) / Float::max(next, T::of(1e-300));
            rayleigh = next;
            v = w;
            v.scale(Complex::new(T::one() / wnorm, T::zero()));
            if it > 0 && rel < tol {
                converged = true;
                break;
            }
        }
        if rayleigh > best {
            best = rayleigh;
            best_converged = converged;
            best_iters = used;
        } else if rayleigh == best {
            best_converged = best_converged || converged;
        }
    }
    Ok(OpNormEstimate {
        value: Float::sqrt(best),
        converged: best_converged,
        iterations: best_iters,
    })
}

/// Frame bounds of T*T with the default 1% safety margins.
pub fn frame_bounds<T: Scalar>(
    op: &TfOperator<T>,
    grid: &Grid<T>,
) -> Result<(T, T), TfError> {
    frame_bounds_with_margin(op, grid, T::of(DEFAULT_FRAME_MARGIN))
}

/// Smallest and largest eigenvalue of the (Hermitian) grid matrix of T*T,
/// returned as (a_est deflated, b_est inflated) by the given margin.
pub fn frame_bounds_with_margin<T: Scalar>(
    op: &TfOperator<T>,
    grid: &Grid<T>,
    margin: T,
) -> Result<(T, T), TfError> {
    let matrix = assemble(op, grid, ShiftMode::Aligned)?;
    let gram = matrix.adjoint() * &matrix;
    let eigenvalues = gram.symmetric_eigenvalues();
    let mut lo = T::infinity();
    let mut hi = T::zero();
    for ev in eigenvalues.iter() {
        lo = Float::min(lo, *ev);
        hi = Float::max(hi, *ev);
    }
    if lo <= T::zero() {
        return Err(TfError::IllConditionedFrame(format!(
            "smallest eigenvalue of T*T is {lo}, discretization numerically singular"
        )));
    }
    Ok((lo * (T::one() - margin), hi * (T::one() + margin)))
}

/// Upper-bound certificate (n+1)^{|Λ|/2} · w(n·R₀) · ‖Tⁿ‖_{B(L²)} for the
/// weighted algebra norm of the n-th power, valid for every submultiplicative
/// weight; the operator-norm factor comes from the grid estimate.
pub fn power_norm_bound<T: Scalar>(
    op: &TfOperator<T>,
    v: &Weight<T>,
    n: usize,
    grid: &Grid<T>,
) -> Result<T, TfError> {
    if op.is_empty() {
        return Err(TfError::EmptyOperator);
    }
    assert!(n >= 1, "power must be >= 1");
    let support_size = op.num_terms();
    let r0 = op.support_radius()?;

    let mut power = op.clone();
    for _ in 1..n {
        power = power
            .compose_ledgered(op, None, DEFAULT_TERM_CAP)
            .map(|(p, _)| p)?;
    }
    let opnorm = operator_norm_estimate(&power, grid, 400)?.value;

    let comb = Float::powf(
        T::of_usize(n + 1),
        T::of_usize(support_size) / T::of(2.0),
    );
    Ok(comb * v.radial(T::of_usize(n) * r0) * opnorm)
}

/// A rigorous lower bound on the spectral radius of a matrix:
/// max_{1 ≤ k ≤ k_max} |tr(Mᵏ)/dim|^{1/k}, since |Σ λ_iᵏ| ≤ dim · r(M)ᵏ.
pub fn spectral_radius_lower_bound<T: Scalar>(
    matrix: &DMatrix<Complex<T>>,
    k_max: usize,
) -> T {
    let dim = matrix.nrows();
    let mut power = matrix.clone();
    let mut best = T::zero();
    for k in 1..=k_max {
        if k > 1 {
            power = &power * matrix;
        }
        let trace: Complex<T> = power.diagonal().iter().fold(
            Complex::new(T::zero(), T::zero()),
            |acc, &v| acc + v,
        );
        let mean = trace.norm() / T::of_usize(dim);
        if mean > T::zero() {
            best = Float::max(best, Float::powf(mean, T::one() / T::of_usize(k)));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::TfPoint;

    type Op = TfOperator<f64>;

    fn grid() -> Grid<f64> {
        Grid::new(1, 64, 8.0).unwrap()
    }

    fn point(t: f64, w: f64) -> TfPoint<f64> {
        TfPoint::new_1d(t, w).unwrap()
    }

    #[test]
    fn identity_assembles_to_identity() {
        let m = assemble(&Op::identity(1), &grid(), ShiftMode::Aligned).unwrap();
        let mut max_dev: f64 = 0.0;
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let expect = if r == c { 1.0 } else { 0.0 };
                max_dev = max_dev.max((m[(r, c)] - Complex::new(expect, 0.0)).norm());
            }
        }
        assert!(max_dev < 1e-15);
    }

    #[test]
    fn scaled_unitary_norm() {
        let op = Op::single(point(1.0, 0.0), Complex::new(3.0, 0.0));
        let est = operator_norm_estimate(&op, &grid(), 200).unwrap();
        assert!((est.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn parallel_phases_reach_two() {
        // U_0 + a grid-frequency modulation has operator norm 2: the two
        // phases align at some sample.
        let g = grid();
        let omega = std::f64::consts::PI / g.half_length() * 4.0;
        let op = Op::from_terms(
            1,
            vec![
                (TfPoint::zero(1), Complex::new(1.0, 0.0)),
                (point(0.0, omega), Complex::new(1.0, 0.0)),
            ],
        )
        .unwrap();
        let matrix = assemble(&op, &g, ShiftMode::Aligned).unwrap();
        let svd = matrix.svd(false, false);
        let sigma_max = svd.singular_values.max();
        assert!((sigma_max - 2.0).abs() < 1e-10);
        let est = operator_norm_estimate(&op, &g, 400).unwrap();
        assert!((est.value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn frame_bounds_of_scalar() {
        let op = Op::identity(1).scale(Complex::new(2.0, 0.0));
        let (a, b) = frame_bounds(&op, &grid()).unwrap();
        assert!((a - 4.0 * 0.99).abs() < 1e-10);
        assert!((b - 4.0 * 1.01).abs() < 1e-10);
    }

    #[test]
    fn frame_bounds_of_geometric_channel() {
        // 1 − 0.5·S_1 has commutative symbol 1 − 0.5 e^{iξ}: bounds
        // ((1−0.5)², (1+0.5)²) hit exactly on the grid frequencies.
        let op = Op::from_terms(
            1,
            vec![
                (TfPoint::zero(1), Complex::new(1.0, 0.0)),
                (point(1.0, 0.0), Complex::new(-0.5, 0.0)),
            ],
        )
        .unwrap();
        let (a, b) = frame_bounds(&op, &grid()).unwrap();
        assert!((a - 0.25 * 0.99).abs() < 1e-9);
        assert!((b - 2.25 * 1.01).abs() < 1e-9);
    }

    #[test]
    fn unitary_bounds_near_one() {
        let op = Op::unit(point(2.0, 1.3));
        let (a, b) = frame_bounds(&op, &grid()).unwrap();
        assert!((a - 0.99).abs() < 1e-9, "a = {a}");
        assert!((b - 1.01).abs() < 1e-9, "b = {b}");
    }

    #[test]
    fn power_norm_bound_examples() {
        let g = grid();
        // Identity, n = 3: (4)^{1/2}·w(0)·1 = 2 for any weight.
        let b = power_norm_bound(&Op::identity(1), &Weight::Constant, 3, &g).unwrap();
        assert!((b - 2.0).abs() < 1e-6);

        // 0.5·U_{(1,0)}, n = 4: 5^{1/2}·0.5⁴ ≈ 0.1398 bounds the true 0.0625.
        let op = Op::single(point(1.0, 0.0), Complex::new(0.5, 0.0));
        let b = power_norm_bound(&op, &Weight::Constant, 4, &g).unwrap();
        assert!((b - 5f64.sqrt() * 0.0625).abs() < 1e-6);
        assert!(b >= 0.0625);
    }

    #[test]
    fn radius_lower_bound_is_below_norm_estimates() {
        let op = Op::from_terms(
            1,
            vec![
                (TfPoint::zero(1), Complex::new(1.0, 0.0)),
                (point(1.0, 0.0), Complex::new(-0.5, 0.0)),
            ],
        )
        .unwrap();
        let matrix = assemble(&op, &grid(), ShiftMode::Aligned).unwrap();
        let lower = spectral_radius_lower_bound(&matrix, 8);
        // Spectral radius of the symbol is max|1 − 0.5 e^{iξ}| = 1.5.
        assert!(lower <= 1.5 + 1e-9);
        assert!(lower > 0.5);
    }
}
