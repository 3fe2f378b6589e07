//! Numerical toolkit for the Banach *-algebra of time-frequency shift
//! operators T = Σ_λ c_λ U_λ with absolutely summable coefficients, where
//! U_{t,ω} f(x) = e^{i⟨ω,x⟩} f(x − t) on L²(ℝ^d).
//!
//! What lives where:
//!
//! * [`operator`] — exact symbolic *-algebra: twisted-convolution products,
//!   adjoints, weighted norms, truncation with mass ledgers.
//! * [`weight`] — submultiplicative radial weights (constant, polynomial,
//!   subexponential, exponential).
//! * [`oracle`] — independent ground truth: discretized L² on a periodic
//!   grid, dense matrix assembly, operator-norm and frame-bound estimation.
//! * [`invert`] — Neumann-series inversion inside the algebra with certified
//!   residuals, the closed-form inverse-norm bound, spectral radius via
//!   operator powers, exponential-decay certification, damped slices.
//! * [`gabor`] — Gabor-frame trace averages and coefficient recovery.
//! * [`window`] — construction of a window making a prescribed finite set of
//!   time-frequency shifts orthonormal, with grid verification.
//!
//! Everything is generic over the real scalar `T: Scalar` (`f32` or `f64`);
//! the `*64` aliases below fix the double-precision instantiations that the
//! CLI and the test suites use.

pub mod error;
pub mod gabor;
pub mod invert;
pub mod operator;
pub mod oracle;
pub mod point;
pub mod scalar;
pub mod weight;
pub mod window;

pub use error::TfError;
pub use operator::{CoeffNorms, OperatorRecord, TermRecord, TfOperator, DEFAULT_TERM_CAP};
pub use point::{PointKey, TfPoint};
pub use scalar::Scalar;
pub use weight::Weight;

/// Double-precision instantiations.
pub type TfPoint64 = TfPoint<f64>;
pub type TfOperator64 = TfOperator<f64>;
pub type Weight64 = Weight<f64>;
pub type Grid64 = oracle::Grid<f64>;
pub type GridFunction64 = oracle::GridFunction<f64>;
pub type GaborSystem64 = gabor::GaborSystem<f64>;
pub type InversionReport64 = invert::InversionReport<f64>;
pub type DecayCertificate64 = invert::DecayCertificate<f64>;
pub type WindowPlan64 = window::WindowPlan<f64>;
