//! Inversion validated against the dense oracle, bound checks, spectral
//! radius estimates, and decay certificates.

mod common;

use common::{frobenius, random_contraction_channel};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tfalg::invert::{
    certify_decay, coefficient_tail, gelfand_spectral_radius, invert_contraction,
    invert_symmetric, inverse_norm_bound, verified_residual,
};
use tfalg::oracle::{
    assemble, frame_bounds, spectral_radius_lower_bound, Grid, ShiftMode,
};
use tfalg::{TfError, TfOperator64, TfPoint64, Weight64, DEFAULT_TERM_CAP};

fn grid_128() -> Grid<f64> {
    Grid::new(1, 128, 8.0).unwrap()
}

fn geometric_channel(damping: f64) -> TfOperator64 {
    TfOperator64::from_terms(
        1,
        vec![
            (TfPoint64::zero(1), Complex::new(1.0, 0.0)),
            (TfPoint64::new_1d(1.0, 0.0).unwrap(), Complex::new(-damping, 0.0)),
        ],
    )
    .unwrap()
}

#[test]
fn inverse_matches_dense_matrix_inverse() {
    let grid = grid_128();
    let h = grid.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..4 {
        let channel = random_contraction_channel(&mut rng, 3, 0.5, h, 8.0, 8);
        let report =
            invert_contraction(&channel, &Weight64::Constant, 1e-9, 400, DEFAULT_TERM_CAP)
                .unwrap();
        let mt = assemble(&channel, &grid, ShiftMode::Aligned).unwrap();
        let minv_direct = mt.clone().try_inverse().expect("grid matrix invertible");
        let minv_series = assemble(&report.inverse, &grid, ShiftMode::Aligned).unwrap();
        let err = frobenius(&(&minv_series - &minv_direct)) / frobenius(&minv_direct);
        assert!(err < 1e-7, "inverse matrices differ by {err}");
    }
}

#[test]
fn residual_is_two_sided_and_honest() {
    let grid = grid_128();
    let h = grid.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let v = Weight64::polynomial(1.0);
    for _ in 0..4 {
        let channel = random_contraction_channel(&mut rng, 3, 0.3, h, 8.0, 4);
        let report = invert_contraction(&channel, &v, 1e-7, 400, DEFAULT_TERM_CAP).unwrap();
        // Recompute from scratch; the report must not understate it.
        let fresh = verified_residual(&channel, &report.inverse, &v, DEFAULT_TERM_CAP).unwrap();
        assert!(fresh <= report.residual_av * (1.0 + 1e-9) + 1e-15);

        let id = TfOperator64::identity(1);
        for (left, right) in [(&channel, &report.inverse), (&report.inverse, &channel)] {
            let prod = left.compose(right).unwrap();
            let defect = prod.sub(&id).unwrap().weighted_norm(&v);
            assert!(defect <= report.residual_av * (1.0 + 1e-9) + 1e-15);
        }
    }
}

#[test]
fn symmetric_mode_from_oracle_bounds() {
    let grid = grid_128();
    let channel = geometric_channel(0.5);
    let (a, b) = frame_bounds(&channel, &grid).unwrap();
    assert!((a - 0.25 * 0.99).abs() < 1e-6);
    assert!((b - 2.25 * 1.01).abs() < 1e-6);

    let sym = invert_symmetric(&channel, &Weight64::Constant, a, b, 1e-7, 4000, DEFAULT_TERM_CAP)
        .unwrap();
    let con =
        invert_contraction(&channel, &Weight64::Constant, 1e-7, 400, DEFAULT_TERM_CAP).unwrap();
    let gap = sym.inverse.sub(&con.inverse).unwrap().l1_norm();
    assert!(gap <= 2e-6, "mode gap {gap}");
}

#[test]
fn norm_bound_dominates_converged_inverse() {
    // Small-radius fixtures stay contractive under polynomial weights, so the
    // inverse converges in the weighted norm the bound speaks about.
    let grid = grid_128();
    let h = grid.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..4 {
        let channel = random_contraction_channel(&mut rng, 3, 0.25, h, 8.0, 3);
        let (a, b) = frame_bounds(&channel, &grid).unwrap();
        for m in 0..=2usize {
            let v = Weight64::polynomial(m as f64);
            let report = match invert_contraction(&channel, &v, 1e-8, 600, DEFAULT_TERM_CAP) {
                Ok(r) => r,
                Err(TfError::NotContractive { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let bound = inverse_norm_bound(&channel, 1.0, m, a, b).unwrap();
            let actual = report.inverse.weighted_norm(&v);
            assert!(
                bound >= actual,
                "trial {trial}, m = {m}: bound {bound} < norm {actual}"
            );
        }
    }
}

#[test]
fn gelfand_estimates_dominate_oracle_radius() {
    let grid = grid_128();
    let channel = geometric_channel(0.5);
    let est =
        gelfand_spectral_radius(&channel, &Weight64::Constant, 12, DEFAULT_TERM_CAP).unwrap();
    // Monotone chain: every estimate >= extrapolated >= true radius lower
    // bound from matrix traces.
    for &e in &est.estimates {
        assert!(e >= est.extrapolated - 1e-12);
    }
    let matrix = assemble(&channel, &grid, ShiftMode::Aligned).unwrap();
    let lower = spectral_radius_lower_bound(&matrix, 12);
    assert!(
        est.extrapolated >= lower - 1e-9,
        "extrapolated {} < lower bound {lower}",
        est.extrapolated
    );
}

#[test]
fn unitary_spectral_radius_closed_form() {
    let u = TfOperator64::single(
        TfPoint64::new_1d(0.75, 1.25).unwrap(),
        Complex::from_polar(0.8, 0.3),
    );
    let est = gelfand_spectral_radius(&u, &Weight64::Constant, 20, DEFAULT_TERM_CAP).unwrap();
    assert!((est.extrapolated - 0.8).abs() < 1e-9);
}

#[test]
fn decay_certificate_holds_out_of_sample() {
    // Certify on coarse radii, then check tails at radii the certificate
    // never saw.
    let channel = geometric_channel(0.2);
    let report =
        invert_contraction(&channel, &Weight64::Constant, 1e-12, 600, DEFAULT_TERM_CAP).unwrap();
    let (a, b) = (0.64 * 0.99, 1.44 * 1.01);
    let cert = certify_decay(&report.inverse, a, b, 1.0, &[2.0, 4.0, 6.0]).unwrap();
    assert!(cert.certified);
    // Tails are nonincreasing, so between samples the certificate holds up
    // to e^{delta * gap} slack (gap = sample spacing); past the last sample
    // the true ln 5 decay outruns the certified rate.
    let gap = 2.0;
    for k in 3..=12 {
        let r = 0.75 * k as f64;
        let tail = coefficient_tail(&report.inverse, r);
        assert!(
            tail <= cert.c_const * (-cert.delta * (r - gap)).exp() * (1.0 + 1e-12),
            "tail at {r} escapes the certificate"
        );
    }
}

#[test]
fn term_cap_stops_runaway_supports() {
    // Three incommensurate shifts: powers populate a cube of points.
    let t = TfOperator64::from_terms(
        1,
        vec![
            (TfPoint64::zero(1), Complex::new(1.0, 0.0)),
            (TfPoint64::new_1d(1.0, 0.0).unwrap(), Complex::new(-0.3, 0.0)),
            (TfPoint64::new_1d(0.5, 1.0).unwrap(), Complex::new(0.0, -0.3)),
            (TfPoint64::new_1d(0.25, -0.5).unwrap(), Complex::new(0.2, 0.1)),
        ],
    )
    .unwrap();
    let result = gelfand_spectral_radius(&t, &Weight64::Constant, 40, 500);
    assert!(matches!(result, Err(TfError::TermCapExceeded { .. })));
}

#[test]
fn gelfand_stops_cleanly_on_weight_overflow() {
    // A strong exponential weight overflows v(n·λ) after a few powers; the
    // estimate list is truncated there instead of poisoning the result.
    let u = TfOperator64::single(
        TfPoint64::new_1d(60.0, 80.0).unwrap(),
        Complex::new(0.5, 0.0),
    );
    let v = Weight64::exponential(2.0);
    let est = gelfand_spectral_radius(&u, &v, 40, DEFAULT_TERM_CAP).unwrap();
    assert!(!est.estimates.is_empty());
    assert!(est.estimates.len() < 40);
    assert!(est.estimates.iter().all(|e| e.is_finite()));
    assert!(est.extrapolated.is_finite());
}

#[test]
fn two_dimensional_inversion() {
    let channel = TfOperator64::from_terms(
        2,
        vec![
            (TfPoint64::zero(2), Complex::new(1.0, 0.0)),
            (
                TfPoint64::new(vec![0.5, -0.25], vec![1.0, 0.5]).unwrap(),
                Complex::new(0.2, 0.1),
            ),
            (
                TfPoint64::new(vec![-0.5, 0.5], vec![0.0, -1.0]).unwrap(),
                Complex::new(0.0, -0.3),
            ),
        ],
    )
    .unwrap();
    let report =
        invert_contraction(&channel, &Weight64::Constant, 1e-8, 200, DEFAULT_TERM_CAP).unwrap();
    assert!(report.residual_av <= 1e-8);
    let fresh =
        verified_residual(&channel, &report.inverse, &Weight64::Constant, DEFAULT_TERM_CAP)
            .unwrap();
    assert!(fresh <= report.residual_av * (1.0 + 1e-9) + 1e-15);
}
