//! Oracle consistency: the discretized torus must represent the algebra
//! faithfully on fully aligned supports, and its spectral estimates must
//! sandwich the coefficient norms.

mod common;

use common::{frobenius, random_aligned_operator, random_contraction_channel, random_free_operator};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tfalg::invert::invert_contraction;
use tfalg::oracle::{
    assemble, frame_bounds, operator_norm_estimate, Grid, GridFunction, ShiftMode,
};
use tfalg::{TfOperator64, TfPoint64, Weight64, DEFAULT_TERM_CAP};

fn grid_128() -> Grid<f64> {
    Grid::new(1, 128, 8.0).unwrap()
}

#[test]
fn homomorphism_product_adjoint_axpy_aligned() {
    let grid = grid_128();
    let h = grid.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let a = random_aligned_operator(&mut rng, 5, h, 8.0, 16);
        let b = random_aligned_operator(&mut rng, 4, h, 8.0, 16);
        let ma = assemble(&a, &grid, ShiftMode::Aligned).unwrap();
        let mb = assemble(&b, &grid, ShiftMode::Aligned).unwrap();

        let product = &ma * &mb;
        let composed = assemble(&a.compose(&b).unwrap(), &grid, ShiftMode::Aligned).unwrap();
        let err = frobenius(&(&composed - &product)) / frobenius(&product).max(1e-300);
        assert!(err < 1e-10, "compose/product mismatch {err}");

        let adj = assemble(&a.adjoint(), &grid, ShiftMode::Aligned).unwrap();
        let err = frobenius(&(&adj - &ma.adjoint())) / frobenius(&ma).max(1e-300);
        assert!(err < 1e-10, "adjoint mismatch {err}");

        let alpha = Complex::new(0.3, -1.1);
        let lin = assemble(
            &TfOperator64::axpy(alpha, &a, &b).unwrap(),
            &grid,
            ShiftMode::Aligned,
        )
        .unwrap();
        let expect = &ma * alpha + &mb;
        let err = frobenius(&(&lin - &expect)) / frobenius(&expect).max(1e-300);
        assert!(err < 1e-10, "axpy mismatch {err}");
    }
}

#[test]
fn homomorphism_fractional_time_shifts() {
    // Pure time shifts interpolate exactly under the discrete spectrum, so
    // the homomorphism holds at machine precision even off the sample grid.
    let grid = grid_128();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let make = |rng: &mut ChaCha8Rng, k: usize| {
            let terms: Vec<_> = (0..k)
                .map(|_| {
                    (
                        TfPoint64::new_1d(rand::Rng::gen_range(rng, -2.0..2.0), 0.0).unwrap(),
                        Complex::new(
                            rand::Rng::gen_range(rng, -1.0..1.0),
                            rand::Rng::gen_range(rng, -1.0..1.0),
                        ),
                    )
                })
                .collect();
            TfOperator64::from_terms(1, terms).unwrap()
        };
        let a = make(&mut rng, 3);
        let b = make(&mut rng, 3);
        let ma = assemble(&a, &grid, ShiftMode::Bandlimited).unwrap();
        let mb = assemble(&b, &grid, ShiftMode::Bandlimited).unwrap();
        let composed =
            assemble(&a.compose(&b).unwrap(), &grid, ShiftMode::Bandlimited).unwrap();
        let product = &ma * &mb;
        let err = frobenius(&(&composed - &product)) / frobenius(&product).max(1e-300);
        assert!(err < 1e-10, "fractional time compose mismatch {err}");
    }
}

#[test]
fn bandlimited_composition_on_smooth_content() {
    // With generic (off-bin) modulations the grid operators agree with the
    // algebra on band-limited content: apply both routes to a Gaussian.
    let grid: Grid<f64> = Grid::new(1, 256, 8.0).unwrap();
    let f = GridFunction::from_fn(grid.clone(), |x| {
        Complex::new((-x[0] * x[0]).exp(), 0.0)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..6 {
        let a = random_free_operator(&mut rng, 3, 1.5);
        let b = random_free_operator(&mut rng, 3, 1.5);
        let via_symbol = f
            .apply_operator(&a.compose(&b).unwrap(), ShiftMode::Bandlimited)
            .unwrap();
        let via_maps = f
            .apply_operator(&b, ShiftMode::Bandlimited)
            .unwrap()
            .apply_operator(&a, ShiftMode::Bandlimited)
            .unwrap();
        let err = via_symbol.sub(&via_maps).norm() / via_maps.norm().max(1e-300);
        assert!(err < 1e-6, "content-level composition error {err}");
    }
}

#[test]
fn unimodular_terms_assemble_to_unitary_matrices() {
    let grid = grid_128();
    let bin = std::f64::consts::PI / 8.0;
    let cases = [
        (1.0, 3.0 * bin, 0.0),
        (-2.125, -7.0 * bin, 1.2),
        (0.375, 12.0 * bin, -2.0),
    ];
    for &(t, w, phase) in &cases {
        let u = TfOperator64::single(
            TfPoint64::new_1d(t, w).unwrap(),
            Complex::from_polar(1.0, phase),
        );
        let m = assemble(&u, &grid, ShiftMode::Aligned).unwrap();
        let gram = m.adjoint() * &m;
        let mut dev: f64 = 0.0;
        for r in 0..gram.nrows() {
            for c in 0..gram.ncols() {
                let expect = if r == c { 1.0 } else { 0.0 };
                dev = dev.max((gram[(r, c)] - Complex::new(expect, 0.0)).norm());
            }
        }
        assert!(dev < 1e-12, "unitarity defect {dev}");
    }
}

#[test]
fn norm_chain_sandwich() {
    // linf <= l2 <= operator norm <= l1 on random aligned fixtures.
    let grid = grid_128();
    let h = grid.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..30 {
        let op = random_aligned_operator(&mut rng, 6, h, 8.0, 10);
        let norms = op.coefficient_norms();
        let est = operator_norm_estimate(&op, &grid, 600).unwrap();
        assert!(norms.linf <= norms.l2 + 1e-6);
        assert!(norms.l2 <= est.value + 1e-6, "l2 {} > opnorm {}", norms.l2, est.value);
        assert!(est.value <= norms.l1 + 1e-6, "opnorm {} > l1 {}", est.value, norms.l1);
    }
}

#[test]
fn estimates_stable_under_refinement() {
    // Doubling the resolution moves the spectral estimates by < 1%.
    let coarse = Grid::new(1, 64, 8.0).unwrap();
    let fine = Grid::new(1, 128, 8.0).unwrap();
    let bin = std::f64::consts::PI / 8.0;
    let fixtures = vec![
        TfOperator64::from_terms(
            1,
            vec![
                (TfPoint64::zero(1), Complex::new(1.0, 0.0)),
                (TfPoint64::new_1d(1.0, 0.0).unwrap(), Complex::new(-0.5, 0.0)),
            ],
        )
        .unwrap(),
        TfOperator64::from_terms(
            1,
            vec![
                (TfPoint64::zero(1), Complex::new(1.0, 0.0)),
                (TfPoint64::new_1d(0.5, 4.0 * bin).unwrap(), Complex::new(0.2, 0.3)),
                (TfPoint64::new_1d(-1.0, -2.0 * bin).unwrap(), Complex::new(0.0, -0.25)),
            ],
        )
        .unwrap(),
    ];
    for op in &fixtures {
        let n_coarse = operator_norm_estimate(op, &coarse, 800).unwrap().value;
        let n_fine = operator_norm_estimate(op, &fine, 800).unwrap().value;
        assert!((n_coarse - n_fine).abs() / n_fine < 0.01);

        let (a_c, b_c) = frame_bounds(op, &coarse).unwrap();
        let (a_f, b_f) = frame_bounds(op, &fine).unwrap();
        assert!((a_c - a_f).abs() / a_f < 0.01);
        assert!((b_c - b_f).abs() / b_f < 0.01);
    }
}

#[test]
fn inversion_ground_truth_on_grid() {
    let grid = grid_128();
    let h = grid.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..5 {
        let channel = random_contraction_channel(&mut rng, 4, 0.6, h, 8.0, 12);
        let report =
            invert_contraction(&channel, &Weight64::Constant, 1e-8, 400, DEFAULT_TERM_CAP)
                .unwrap();
        let mt = assemble(&channel, &grid, ShiftMode::Aligned).unwrap();
        let minv = assemble(&report.inverse, &grid, ShiftMode::Aligned).unwrap();
        let product = &mt * &minv;
        let n = product.nrows();
        let eye = nalgebra::DMatrix::<Complex<f64>>::identity(n, n);
        let err = frobenius(&(&product - &eye)) / (n as f64).sqrt();
        assert!(
            err <= report.residual_av + 1e-8,
            "matrix residual {err} exceeds certified {}",
            report.residual_av
        );
    }
}

#[test]
fn two_dimensional_homomorphism() {
    // Same exactness story one dimension up: supports aligned to the sample
    // and bin lattices of a 16x16 torus.
    let grid = Grid::with_cap(2, 16, 4.0, 4096).unwrap();
    let h = grid.spacing();
    let bin = std::f64::consts::PI / 4.0;
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut random_op = |rng: &mut ChaCha8Rng| {
        let terms: Vec<(TfPoint64, Complex<f64>)> = (0..3)
            .map(|_| {
                let t = vec![
                    h * rand::Rng::gen_range(rng, -4i64..=4) as f64,
                    h * rand::Rng::gen_range(rng, -4i64..=4) as f64,
                ];
                let omega = vec![
                    bin * rand::Rng::gen_range(rng, -4i64..=4) as f64,
                    bin * rand::Rng::gen_range(rng, -4i64..=4) as f64,
                ];
                (
                    TfPoint64::new(t, omega).unwrap(),
                    Complex::new(
                        rand::Rng::gen_range(rng, -1.0..1.0),
                        rand::Rng::gen_range(rng, -1.0..1.0),
                    ),
                )
            })
            .collect();
        TfOperator64::from_terms(2, terms).unwrap()
    };
    for _ in 0..5 {
        let a = random_op(&mut rng);
        let b = random_op(&mut rng);
        let ma = assemble(&a, &grid, ShiftMode::Aligned).unwrap();
        let mb = assemble(&b, &grid, ShiftMode::Aligned).unwrap();
        let composed = assemble(&a.compose(&b).unwrap(), &grid, ShiftMode::Aligned).unwrap();
        let product = &ma * &mb;
        let err = frobenius(&(&composed - &product)) / frobenius(&product).max(1e-300);
        assert!(err < 1e-10, "2-d compose/product mismatch {err}");

        let adj = assemble(&a.adjoint(), &grid, ShiftMode::Aligned).unwrap();
        let err = frobenius(&(&adj - &ma.adjoint())) / frobenius(&ma).max(1e-300);
        assert!(err < 1e-10, "2-d adjoint mismatch {err}");
    }

    // Norm chain holds on the 2-d grid as well.
    let op = random_op(&mut rng);
    let norms = op.coefficient_norms();
    let est = operator_norm_estimate(&op, &grid, 800).unwrap();
    assert!(norms.l2 <= est.value + 1e-6);
    assert!(est.value <= norms.l1 + 1e-6);
}

#[test]
fn power_norm_bound_dominates_weighted_powers() {
    let grid = grid_128();
    let h = grid.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..6 {
        let op = random_aligned_operator(&mut rng, 3, h, 8.0, 6);
        for v in [Weight64::Constant, Weight64::polynomial(1.0)] {
            let mut power = op.clone();
            for n in 1..=5usize {
                if n > 1 {
                    power = power.compose(&op).unwrap();
                }
                let bound =
                    tfalg::oracle::power_norm_bound(&op, &v, n, &grid).unwrap();
                let actual = power.weighted_norm(&v);
                assert!(
                    bound >= actual * (1.0 - 1e-5),
                    "n = {n}: bound {bound} < ||T^n|| = {actual}"
                );
            }
        }
    }
}
