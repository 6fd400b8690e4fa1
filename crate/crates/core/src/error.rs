//! Crate-wide error type. Each precondition named by an operation contract
//! gets its own variant so rejections are distinguishable in tests.

use thiserror::Error;

use crate::space::SpaceDescriptor;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error("space dimension must be at least 1")]
    ZeroDimension,
    #[error("basis label {label} out of range for dimension {dim}")]
    LabelOutOfRange { label: usize, dim: usize },
    #[error("space mismatch: {left:?} vs {right:?}")]
    SpaceMismatch {
        left: SpaceDescriptor,
        right: SpaceDescriptor,
    },
    #[error("grade mismatch: {left} vs {right}")]
    GradeMismatch { left: usize, right: usize },
    #[error("parity mismatch")]
    ParityMismatch,
    #[error("kind mismatch: expected {expected}")]
    KindMismatch { expected: &'static str },
    #[error("grade {grade} out of range for dimension {dim}")]
    GradeOutOfRange { grade: usize, dim: usize },
    #[error("grade overflow: {left} + {right} exceeds dimension {dim}")]
    GradeOverflow { left: usize, right: usize, dim: usize },
    #[error("interior product requires contracting grade {lo} <= {hi}")]
    InteriorGrade { lo: usize, hi: usize },
    #[error("adjunction grades do not balance: {aprime} + {a} != {w}")]
    UnbalancedAdjunction { aprime: usize, a: usize, w: usize },
    #[error("coefficient tensor shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("bilinear block must be symmetric: |B - B^T| = {deviation}")]
    NonSymmetricBlock { deviation: f64 },
    #[error("cell grade {grade} exceeds space dimension {dim}")]
    CellGradeOutOfRange { grade: usize, dim: usize },
    #[error("current support is not contained in the form's domain")]
    SupportViolation,
    #[error("degree mismatch: current of dimension {current} against form of grade {form}")]
    CurrentDegreeMismatch { current: usize, form: usize },
    #[error("Dirac weight must be a nonzero odd {dim}-vector")]
    ZeroDiracWeight { dim: usize },
    #[error("cube domain is degenerate: min must be strictly below max on every axis")]
    DegenerateCube,
    #[error("plane wave covector is not null: g^{{-1}}(k,k) = {0}")]
    NonNullWave(f64),
    #[error("plane wave polarization is not transverse: g^{{-1}}(k,pol) = {0}")]
    NonTransverseWave(f64),
    #[error("speed of light must be positive, got {0}")]
    NonPositiveSpeedOfLight(f64),
    #[error("quadrature order must be at least 1")]
    ZeroQuadratureOrder,
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("unknown field family {0:?}")]
    UnknownFamily(String),
    #[error("invalid field specification: {0}")]
    InvalidFieldSpec(String),
}
