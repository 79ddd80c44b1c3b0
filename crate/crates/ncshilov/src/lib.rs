//! Numerical toolkit for the noncommutative Shilov boundary of a
//! finite-dimensional operator space.
//!
//! Given a concrete subspace `X` of complex `r x c` matrices, the crate
//! computes the linking C*-algebra of the natural Hilbert C*-extension,
//! locates the Shilov boundary ideal by per-block complete-isometry tests,
//! and returns the triple envelope `T(X)` together with its corner
//! algebras. On top of the envelope it computes the left/right multiplier
//! algebras `M_l(X)`, `A_l(X)`, `M_r(X)`, multiplier norms, oplication
//! certificates (BRS-style characterization theorems), Banach-Stone
//! factorizations, and the MIN-space bridge to classical Banach-space
//! multipliers.
//!
//! Start with the runnable programs under `examples/`: each one exercises
//! a major capability end to end. A thin CLI (`ncshilov`) accepts JSON
//! problem files; see the `cli` module for the schema.

pub mod cli;
pub mod envelope;
pub mod gallery;
pub mod matcore;
pub mod minspace;
pub mod multiplier;
pub mod oplication;
pub mod opspace;
pub mod search;
pub mod staralg;

pub use matcore::{CMatrix, CVector, Tolerances, C64};
pub use opspace::{LevelElement, OperatorSpace};

/// Toolkit-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
    #[error("inconsistent numerics: {0}")]
    InconsistentNumerics(String),
    #[error("not a multiplier: {0}")]
    NotAMultiplier(String),
    #[error("map is not completely isometric (defect {0:.3e})")]
    NotIsometric(f64),
    #[error("structure violation: {0}")]
    StructureViolation(String),
    #[error("hypothesis not satisfied: {0}")]
    NotApplicable(String),
    #[error("certified theorem contradicted by numerics: {0}")]
    TheoremViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
