//! Reproducible random channels for the equalization demo and the test
//! fixtures.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tfalg::oracle::Grid;
use tfalg::{TfOperator64, TfPoint64};

/// Draws a random multipath channel U_0 + Σ c_λ U_λ with `k` off-origin
/// terms: complex-Gaussian coefficients rescaled so the off-origin mass is
/// exactly `margin` (< 1 keeps the contraction route applicable), supports
/// uniform in [−box, box]², optionally snapped to the grid lattice for
/// aligned-oracle runs.
pub fn random_channel(
    seed: u64,
    k: usize,
    margin: f64,
    box_radius: f64,
    snap_to: Option<&Grid<f64>>,
) -> TfOperator64 {
    assert!(margin > 0.0 && margin < 1.0, "margin must be in (0, 1)");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut terms: Vec<(TfPoint64, Complex<f64>)> = Vec::with_capacity(k);
        while terms.len() < k {
            let mut t = rng.gen_range(-box_radius..box_radius);
            let mut omega = rng.gen_range(-box_radius..box_radius);
            if let Some(grid) = snap_to {
                let h = grid.spacing();
                let bin = std::f64::consts::PI / grid.half_length();
                t = (t / h).round() * h;
                omega = (omega / bin).round() * bin;
            }
            let point = TfPoint64::new_1d(t, omega).unwrap();
            if point.is_zero() || terms.iter().any(|(p, _)| *p == point) {
                continue;
            }
            terms.push((point, complex_gaussian(&mut rng)));
        }
        let off = match TfOperator64::from_terms(1, terms) {
            Ok(op) if op.num_terms() == k && op.l1_norm() > 1e-9 => op,
            _ => continue,
        };
        let off = off.scale(Complex::new(margin / off.l1_norm(), 0.0));
        return TfOperator64::axpy(
            Complex::new(1.0, 0.0),
            &TfOperator64::identity(1),
            &off,
        )
        .unwrap();
    }
}

/// Standard complex Gaussian via Box-Muller.
fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex<f64> {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    Complex::new(r * theta.cos(), r * theta.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_respects_margin_and_seed() {
        let grid = Grid::new(1, 128, 8.0).unwrap();
        let a = random_channel(42, 5, 0.8, 2.0, Some(&grid));
        let b = random_channel(42, 5, 0.8, 2.0, Some(&grid));
        assert_eq!(a, b);
        assert_eq!(a.num_terms(), 6);
        let off_mass = a.l1_norm() - a.coeff(&TfPoint64::zero(1)).norm();
        assert!((off_mass - 0.8).abs() < 1e-12);
        for (p, _) in a.iter_terms() {
            assert!(grid.alignment_offset(p.t()[0]).is_some());
        }
    }
}
