//! Dense linear algebra: matrices and vectors, a Jacobi symmetric
//! eigensolver, Gram-Schmidt orthonormalization, random orthogonal
//! matrices and Cholesky factorization.

mod cholesky;
mod eigen;
mod matrix;
mod orth;

use thiserror::Error;

pub use cholesky::{spd_factor, SpdFactor};
pub use eigen::{fix_sign, sym_eigendecompose, sym_spectral_norm, EigenDecomposition};
pub use matrix::{dot, norm, DenseMatrix, DenseVector};
pub use orth::{gram_schmidt, random_orthogonal};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("column {column} is linearly dependent on its predecessors")]
    RankDeficient { column: usize },
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry")]
    NonFinite,
}
