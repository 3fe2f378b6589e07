//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TfError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinates must be finite")]
    NonFiniteCoordinate,

    #[error("operation requires a nonempty operator")]
    EmptyOperator,

    #[error("not contractive: off-origin weighted mass {off_mass} >= |c_0| = {center}")]
    NotContractive { off_mass: f64, center: f64 },

    #[error("invalid spectral bounds: need 0 < A <= B, got A = {a}, B = {b}")]
    InvalidBounds { a: f64, b: f64 },

    #[error("iteration limit {max_iter} reached, best residual {residual}")]
    MaxIterations { max_iter: usize, residual: f64 },

    #[error("live-term cap exceeded: {terms} terms, cap {cap}")]
    TermCapExceeded { terms: usize, cap: usize },

    #[error("grid cap exceeded: {points} points, cap {cap}")]
    GridCapExceeded { points: usize, cap: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("time shift {shift} is not aligned to grid spacing {spacing}")]
    MisalignedShift { shift: f64, spacing: f64 },

    #[error("grid too small: requires half-length L >= {required_l}, got {actual_l}")]
    GridTooSmall { required_l: f64, actual_l: f64 },

    #[error("lattice incompatible with grid: {0}")]
    LatticeIncompatible(String),

    #[error("frame operator ill-conditioned: {0}")]
    IllConditionedFrame(String),

    #[error("truncation window exceeds grid reliable region: {0}")]
    TruncationWindowExceedsGrid(String),

    #[error("power iteration did not converge within {iters} iterations")]
    NoConvergence { iters: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
