//! Occupation-number bases and sparse second-quantized operators.
//!
//! Every operator is bound to the [`Basis`] it was built on; arithmetic between
//! operators on different bases is an error. Operators act as `P O P` where `P`
//! projects onto the basis: images that leave the basis are dropped.

mod basis;
mod ladder;
mod operator;
mod sector;

pub use basis::{Attachment, Basis, Constraint, ModeSpec, Occupation, SectorLabel, Statistics};
pub use ladder::{apply_ladder, apply_string, ladder, Ladder};
pub use operator::{SparseOperator, Triplet};
pub use sector::{restrict_by, sector_restrict, Injection, Sector};

pub use num_complex::Complex64 as C64;

/// Stored values at or below this magnitude are dropped.
pub const DROP_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FockError {
    #[error("basis dimension exceeds cap {cap}")]
    DimensionCap { cap: usize },
    #[error("constraints admit no state")]
    EmptyBasis,
    #[error("operators live on different bases ({left} vs {right})")]
    BasisMismatch { left: u64, right: u64 },
    #[error("mode {0} is not part of the basis")]
    UnknownMode(usize),
    #[error("sector operator is not diagonal (entry at row {row}, col {col})")]
    NonDiagonal { row: usize, col: usize },
    #[error("occupation {value} of mode {mode} exceeds its cap")]
    CapViolation { mode: usize, value: u8 },
    #[error("state has {got} entries, basis has {expected} modes")]
    ModeCount { expected: usize, got: usize },
    #[error("triplet text: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, FockError>;
