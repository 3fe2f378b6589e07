//! Brute-force ground truth on a discretized torus.
//!
//! Everything the symbolic algebra claims is checked here against dense
//! linear algebra: L²(ℝ^d) is replaced by complex samples on a periodic grid
//! over [−L, L)^d, time-frequency shifts act by circular index shifts (or
//! trigonometric interpolation for fractional shifts) and diagonal phases,
//! and operators become explicit matrices. Fixtures keep supports well inside
//! the box so periodization artifacts stay below test tolerances.

mod dense;

pub use dense::{
    assemble, frame_bounds, frame_bounds_with_margin, operator_norm_estimate, power_norm_bound,
    spectral_radius_lower_bound, OpNormEstimate, DEFAULT_FRAME_MARGIN,
};

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex;
use num_traits::Float;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::TfError;
use crate::operator::TfOperator;
use crate::point::TfPoint;
use crate::scalar::{Kahan, Scalar};

/// Default cap on total grid points (n_samples^d).
pub const DEFAULT_POINT_CAP: usize = 4096;

/// How time shifts are realized on the grid.
///
/// `Aligned` requires every shift component to be an integer multiple of the
/// spacing and is exact (permutation × diagonal phase); `Bandlimited` handles
/// arbitrary real shifts by discrete-spectrum interpolation. Frequency shifts
/// are exact diagonal phases in both modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftMode {
    Aligned,
    Bandlimited,
}

/// A periodic sampling grid over [−L, L)^d.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T: Scalar> {
    d: usize,
    n_samples: usize,
    half_length: T,
}

impl<T: Scalar> Grid<T> {
    pub fn new(d: usize, n_samples: usize, half_length: T) -> Result<Self, TfError> {
        Self::with_cap(d, n_samples, half_length, DEFAULT_POINT_CAP)
    }

    pub fn with_cap(
        d: usize,
        n_samples: usize,
        half_length: T,
        point_cap: usize,
    ) -> Result<Self, TfError> {
        if d == 0 {
            return Err(TfError::InvalidGrid("dimension must be >= 1".into()));
        }
        if n_samples < 8 || !n_samples.is_power_of_two() {
            return Err(TfError::InvalidGrid(format!(
                "n_samples must be a power of two >= 8, got {n_samples}"
            )));
        }
        if half_length <= T::zero() {
            return Err(TfError::InvalidGrid("half-length must be > 0".into()));
        }
        let points = n_samples.checked_pow(d as u32).ok_or_else(|| {
            TfError::InvalidGrid("grid point count overflows".into())
        })?;
        if points > point_cap {
            return Err(TfError::GridCapExceeded {
                points,
                cap: point_cap,
            });
        }
        Ok(Self {
            d,
            n_samples,
            half_length,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn half_length(&self) -> T {
        self.half_length
    }

    /// Sample spacing h = 2L/n.
    pub fn spacing(&self) -> T {
        (self.half_length + self.half_length) / T::of_usize(self.n_samples)
    }

    pub fn total_points(&self) -> usize {
        self.n_samples.pow(self.d as u32)
    }

    /// Coordinate of a 1-d sample index: x_k = −L + k·h.
    pub fn coordinate(&self, index: usize) -> T {
        -self.half_length + T::of_usize(index) * self.spacing()
    }

    /// Decomposes a flat row-major index into per-axis indices.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.d];
        for a in (0..self.d).rev() {
            idx[a] = flat % self.n_samples;
            flat /= self.n_samples;
        }
        idx
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .fold(0usize, |acc, &i| acc * self.n_samples + i)
    }

    /// Position vector of a flat index.
    pub fn position(&self, flat: usize) -> Vec<T> {
        self.multi_index(flat)
            .into_iter()
            .map(|i| self.coordinate(i))
            .collect()
    }

    /// Integer offset of an aligned shift component, if it is one.
    pub fn alignment_offset(&self, t: T) -> Option<i64> {
        let h = self.spacing();
        let ratio = t / h;
        let rounded = Float::round(ratio);
        let tol = T::of(1e-9);
        (Float::abs(ratio - rounded) <= tol).then(|| rounded.to_i64())?
    }

    /// Signed DFT frequency ξ_j = π·j̃/L for output bin j.
    fn bin_frequency(&self, j: usize) -> T {
        let n = self.n_samples;
        let signed = if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        };
        T::PI() * T::from_i64(signed).unwrap() / self.half_length
    }
}

/// Complex samples of a function on a [`Grid`], row-major over axes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T: Scalar> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        let n = grid.total_points();
        Self {
            grid,
            values: vec![Complex::new(T::zero(), T::zero()); n],
        }
    }

    /// Samples `f` at every grid position.
    pub fn from_fn(grid: Grid<T>, f: impl Fn(&[T]) -> Complex<T>) -> Self {
        let values = (0..grid.total_points())
            .map(|i| f(&grid.position(i)))
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: Grid<T>, values: Vec<Complex<T>>) -> Result<Self, TfError> {
        if values.len() != grid.total_points() {
            return Err(TfError::InvalidArgument(format!(
                "value count {} does not match grid points {}",
                values.len(),
                grid.total_points()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    /// Grid approximation of the L² pairing: ⟨f, g⟩ = h^d Σ f_k conj(g_k).
    pub fn inner(&self, other: &Self) -> Complex<T> {
        debug_assert_eq!(self.grid, other.grid);
        let mut acc = Kahan::default();
        for (a, b) in self.values.iter().zip(&other.values) {
            acc.add(*a * b.conj());
        }
        let hd = Float::powi(self.grid.spacing(), self.grid.d as i32);
        acc.value() * Complex::new(hd, T::zero())
    }

    pub fn norm(&self) -> T {
        Float::sqrt(Float::abs(self.inner(self).re))
    }

    pub fn scale(&mut self, alpha: Complex<T>) {
        for v in &mut self.values {
            *v *= alpha;
        }
    }

    pub fn add_scaled(&mut self, alpha: Complex<T>, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += alpha * *o;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(Complex::new(-T::one(), T::zero()), other);
        out
    }

    /// Applies the time-frequency shift U_λ = M_ω S_t on the grid:
    /// (U_λ f)(x) = e^{i⟨ω,x⟩} f(x − t) with periodic wraparound.
    pub fn shifted(&self, lambda: &TfPoint<T>, mode: ShiftMode) -> Result<Self, TfError> {
        if lambda.dim() != self.grid.d {
            return Err(TfError::DimensionMismatch {
                expected: self.grid.d,
                got: lambda.dim(),
            });
        }
        let mut out = match mode {
            ShiftMode::Aligned => self.shift_aligned(lambda.t())?,
            ShiftMode::Bandlimited => self.shift_bandlimited(lambda.t()),
        };
        out.modulate(lambda.omega());
        Ok(out)
    }

    /// Diagonal phase e^{i⟨ω,x⟩}; exact for arbitrary real ω.
    pub fn modulate(&mut self, omega: &[T]) {
        if omega.iter().all(|w| w.is_zero()) {
            return;
        }
        for flat in 0..self.values.len() {
            let x = self.grid.position(flat);
            let dot = x
                .iter()
                .zip(omega)
                .map(|(&xi, &wi)| xi * wi)
                .fold(T::zero(), |a, b| a + b);
            self.values[flat] *= Complex::from_polar(T::one(), dot);
        }
    }

    fn shift_aligned(&self, t: &[T]) -> Result<Self, TfError> {
        let n = self.grid.n_samples as i64;
        let offsets: Result<Vec<i64>, TfError> = t
            .iter()
            .map(|&ti| {
                self.grid.alignment_offset(ti).ok_or(TfError::MisalignedShift {
                    shift: ti.to_f64().unwrap_or(f64::NAN),
                    spacing: self.grid.spacing().to_f64().unwrap_or(f64::NAN),
                })
            })
            .collect();
        let offsets = offsets?;
        let mut out = Self::zeros(self.grid.clone());
        for flat in 0..self.values.len() {
            let mut src = self.grid.multi_index(flat);
            for (a, &m) in src.iter_mut().zip(&offsets) {
                let shifted = (*a as i64 - m).rem_euclid(n);
                *a = shifted as usize;
            }
            out.values[flat] = self.values[self.grid.flat_index(&src)];
        }
        Ok(out)
    }

    fn shift_bandlimited(&self, t: &[T]) -> Self {
        let mut out = self.clone();
        for (axis, &shift) in t.iter().enumerate() {
            if shift.is_zero() {
                continue;
            }
            out.fractional_shift_axis(axis, shift);
        }
        out
    }

    /// In-place fractional delay along one axis: DFT, multiply the bin at
    /// frequency ξ by e^{−i t ξ}, inverse DFT.
    fn fractional_shift_axis(&mut self, axis: usize, t: T) {
        let n = self.grid.n_samples;
        let multipliers: Vec<Complex<T>> = (0..n)
            .map(|j| Complex::from_polar(T::one(), -t * self.grid.bin_frequency(j)))
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scale = Complex::new(T::one() / T::of_usize(n), T::zero());

        let stride: usize = self.grid.n_samples.pow((self.grid.d - 1 - axis) as u32);
        let lines = self.values.len() / n;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
        for line in 0..lines {
            // Base index of this line: skip over the axis' own stride block.
            let block = line / stride;
            let offset = line % stride;
            let base = block * stride * n + offset;
            for (k, slot) in buf.iter_mut().enumerate() {
                *slot = self.values[base + k * stride];
            }
            forward.process(&mut buf);
            for (k, slot) in buf.iter_mut().enumerate() {
                *slot *= multipliers[k];
            }
            inverse.process(&mut buf);
            for (k, slot) in buf.iter().enumerate() {
                self.values[base + k * stride] = *slot * scale;
            }
        }
    }

    /// Σ_λ c_λ U_λ f — applies a whole operator, choosing the aligned path
    /// per term when the shift allows it.
    pub fn apply_operator(&self, op: &TfOperator<T>, mode: ShiftMode) -> Result<Self, TfError> {
        if op.dim() != self.grid.d {
            return Err(TfError::DimensionMismatch {
                expected: self.grid.d,
                got: op.dim(),
            });
        }
        let mut out = Self::zeros(self.grid.clone());
        for (point, coeff) in op.iter_terms() {
            let term_mode = match mode {
                ShiftMode::Aligned => ShiftMode::Aligned,
                ShiftMode::Bandlimited => {
                    if point
                        .t()
                        .iter()
                        .all(|&ti| self.grid.alignment_offset(ti).is_some())
                    {
                        ShiftMode::Aligned
                    } else {
                        ShiftMode::Bandlimited
                    }
                }
            };
            let shifted = self.shifted(&point, term_mode)?;
            out.add_scaled(coeff, &shifted);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Binary import/export
// ---------------------------------------------------------------------------

/// JSON sidecar accompanying the raw sample file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSidecar {
    pub d: usize,
    pub n_samples: usize,
    #[serde(rename = "L")]
    pub half_length: f64,
}

impl<T: Scalar> GridFunction<T> {
    /// Writes interleaved (re, im) little-endian doubles plus a `.json`
    /// sidecar describing the grid.
    pub fn write_binary(&self, path: &Path) -> std::io::Result<()> {
        let mut file = std::fs::File::create(path)?;
        let mut bytes = Vec::with_capacity(self.values.len() * 16);
        for v in &self.values {
            bytes.extend_from_slice(&v.re.to_f64().unwrap().to_le_bytes());
            bytes.extend_from_slice(&v.im.to_f64().unwrap().to_le_bytes());
        }
        file.write_all(&bytes)?;
        let sidecar = GridSidecar {
            d: self.grid.d,
            n_samples: self.grid.n_samples,
            half_length: self.grid.half_length.to_f64().unwrap(),
        };
        std::fs::write(
            path.with_extension("json"),
            serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"),
        )
    }

    pub fn read_binary(path: &Path) -> Result<Self, TfError> {
        let sidecar_text = std::fs::read_to_string(path.with_extension("json"))
            .map_err(|e| TfError::InvalidArgument(format!("sidecar: {e}")))?;
        let sidecar: GridSidecar = serde_json::from_str(&sidecar_text)
            .map_err(|e| TfError::InvalidArgument(format!("sidecar: {e}")))?;
        let grid = Grid::with_cap(
            sidecar.d,
            sidecar.n_samples,
            T::of(sidecar.half_length),
            usize::MAX,
        )?;
        let mut file = std::fs::File::open(path)
            .map_err(|e| TfError::InvalidArgument(format!("samples: {e}")))?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)
            .map_err(|e| TfError::InvalidArgument(format!("samples: {e}")))?;
        if bytes.len() != grid.total_points() * 16 {
            return Err(TfError::InvalidArgument(format!(
                "sample file holds {} bytes, expected {}",
                bytes.len(),
                grid.total_points() * 16
            )));
        }
        let values = bytes
            .chunks_exact(16)
            .map(|chunk| {
                let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
                let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
                Complex::new(T::of(re), T::of(im))
            })
            .collect();
        GridFunction::from_values(grid, values)
    }
}
