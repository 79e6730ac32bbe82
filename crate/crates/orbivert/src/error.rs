//! Crate-wide error type.
//!
//! Validation failures carry enough position information to point at the
//! offending entry; numeric failures report the quantity that broke the
//! tolerance so callers can decide between retrying deeper and giving up.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("gram matrix not symmetric at ({row},{col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("gram matrix not positive definite: leading minor of order {order} is not positive")]
    NotPositiveDefinite { order: usize },

    #[error("gram matrix not even: diagonal entry {index} is odd")]
    NotEven { index: usize },

    #[error("matrix does not preserve the bilinear form at ({row},{col})")]
    NotIsometry { row: usize, col: usize },

    #[error("isometry order exceeds cap {cap}")]
    OrderCapExceeded { cap: u64 },

    #[error("eigenvalue structure admits no cycle shape: {detail}")]
    InconsistentShape { detail: String },

    #[error("quadratic form on the span is degenerate or indefinite")]
    DegenerateGram,

    #[error("enumeration region too large: {detail}")]
    EnumerationTooLarge { detail: String },

    #[error("series field modes differ (exact vs complex); promote explicitly before combining")]
    ModeMismatch,

    #[error("series has no invertible leading term")]
    ZeroLeading,

    #[error("shift does not lie in the fixed subspace; project it first")]
    NonProjectedShift,

    #[error("lattice is not unimodular (det = {det})")]
    NotUnimodular { det: String },

    #[error("series tail bound {bound:e} at t = {point} exceeds target {target:e}; deepen the truncation")]
    TailTooLarge { point: f64, bound: f64, target: f64 },

    #[error("level {level} exceeds the cap {cap} for direct trace expansion")]
    LevelCapExceeded { level: u64, cap: u64 },

    #[error("grading spacing does not match an order-2 twist")]
    SpacingMismatch,

    #[error("cycle length {t} has negative multiplicity in a permutation shape")]
    NegativeCycle { t: u64 },

    #[error("cycle shape spans {got} coordinates but {expected} tensor factors were declared")]
    ShapeRankMismatch { expected: u64, got: u64 },

    #[error("limit profile disagrees with the computed weight gap: {detail}")]
    InconsistentTrend { detail: String },

    #[error("ground degeneracy squared {value} is not a rational square")]
    NonSquareDegeneracy { value: String },

    #[error("bad input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
