//! Shared fixture generators for the integration suites.
#![allow(dead_code)]

use num_complex::Complex;
use rand::Rng;
use tfalg::{TfOperator64, TfPoint64};

/// Random operator with support aligned to both grid lattices: time shifts
/// multiples of `h`, frequencies multiples of the fundamental bin π/L. On
/// such supports the discretized torus represents the algebra exactly.
pub fn random_aligned_operator(
    rng: &mut impl Rng,
    n_terms: usize,
    h: f64,
    half_length: f64,
    max_cells: i64,
) -> TfOperator64 {
    let bin = std::f64::consts::PI / half_length;
    let terms: Vec<(TfPoint64, Complex<f64>)> = (0..n_terms)
        .map(|_| {
            let t = h * rng.gen_range(-max_cells..=max_cells) as f64;
            let omega = bin * rng.gen_range(-max_cells..=max_cells) as f64;
            let coeff = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (TfPoint64::new_1d(t, omega).unwrap(), coeff)
        })
        .collect();
    TfOperator64::from_terms(1, terms).unwrap()
}

/// Random operator with unconstrained real support in a box.
pub fn random_free_operator(rng: &mut impl Rng, n_terms: usize, box_radius: f64) -> TfOperator64 {
    let terms: Vec<(TfPoint64, Complex<f64>)> = (0..n_terms)
        .map(|_| {
            let t = rng.gen_range(-box_radius..box_radius);
            let omega = rng.gen_range(-box_radius..box_radius);
            let coeff = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (TfPoint64::new_1d(t, omega).unwrap(), coeff)
        })
        .collect();
    TfOperator64::from_terms(1, terms).unwrap()
}

/// Random contraction-eligible channel: identity plus `k` off-origin terms
/// with aligned support, rescaled so the off-origin mass is `margin` < 1.
pub fn random_contraction_channel(
    rng: &mut impl Rng,
    k: usize,
    margin: f64,
    h: f64,
    half_length: f64,
    max_cells: i64,
) -> TfOperator64 {
    loop {
        let off = random_aligned_operator(rng, k, h, half_length, max_cells);
        // Knock out any accidental origin term, rescale to the margin.
        let origin_coeff = off.coeff(&TfPoint64::zero(1));
        let off = if origin_coeff.norm() > 0.0 {
            TfOperator64::axpy(
                Complex::new(-1.0, 0.0),
                &TfOperator64::single(TfPoint64::zero(1), origin_coeff),
                &off,
            )
            .unwrap()
        } else {
            off
        };
        let mass = off.l1_norm();
        if mass < 1e-6 {
            continue;
        }
        let off = off.scale(Complex::new(margin / mass, 0.0));
        return TfOperator64::axpy(
            Complex::new(1.0, 0.0),
            &TfOperator64::identity(1),
            &off,
        )
        .unwrap();
    }
}

pub fn frobenius(m: &nalgebra::DMatrix<Complex<f64>>) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}
