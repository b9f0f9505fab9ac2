//! Comparison estimators: pooled PCA and one-shot divide-and-conquer.

use rayon::prelude::*;

use crate::linalg::{sym_eigendecompose, DenseMatrix, LinalgError};

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineResult {
    /// `d × L`, orthonormal columns.
    pub u_hat: DenseMatrix,
    /// Descending.
    pub lambdas: Vec<f64>,
}

fn top_pairs(m: &DenseMatrix, l: usize) -> Result<BaselineResult, LinalgError> {
    let e = sym_eigendecompose(m)?;
    if l > e.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: e.dim(),
            found: l,
        });
    }
    Ok(BaselineResult {
        u_hat: e.leading_vectors(l),
        lambdas: e.values[..l].to_vec(),
    })
}

/// Top-`L` eigenpairs of `AᵀA/n` on the pooled data.
pub fn oracle_pca(a: &DenseMatrix, l: usize) -> Result<BaselineResult, LinalgError> {
    top_pairs(&a.gram().scaled(1.0 / a.rows() as f64), l)
}

/// Top-`L` eigenpairs of an arbitrary symmetric matrix.
pub fn oracle_from_matrix(m: &DenseMatrix, l: usize) -> Result<BaselineResult, LinalgError> {
    top_pairs(m, l)
}

/// `Σ̃ = K⁻¹ Σ_k Û_k Û_kᵀ` over the top-`L` eigenvectors of each local
/// matrix. The average is unweighted even for unbalanced shards.
pub fn dc_aggregate_matrices(locals: &[DenseMatrix], l: usize) -> Result<DenseMatrix, LinalgError> {
    assert!(!locals.is_empty(), "need at least one local matrix");
    let projectors: Vec<DenseMatrix> = locals
        .par_iter()
        .map(|m| top_pairs(m, l).map(|r| r.u_hat.outer_gram()))
        .collect::<Result<_, _>>()?;
    let d = projectors[0].rows();
    let mut acc = DenseMatrix::zeros(d, d);
    for p in &projectors {
        acc.add_scaled(1.0, p);
    }
    acc.scale(1.0 / projectors.len() as f64);
    Ok(acc)
}

/// DC aggregate over sample shards, local matrices `A_kᵀA_k/m_k`.
pub fn dc_aggregate(shards: &[DenseMatrix], l: usize) -> Result<DenseMatrix, LinalgError> {
    let locals: Vec<DenseMatrix> = shards
        .par_iter()
        .map(|a| a.gram().scaled(1.0 / a.rows() as f64))
        .collect();
    dc_aggregate_matrices(&locals, l)
}

/// Divide-and-conquer PCA: top-`L` eigenpairs of [`dc_aggregate`].
pub fn dc_pca(shards: &[DenseMatrix], l: usize) -> Result<BaselineResult, LinalgError> {
    top_pairs(&dc_aggregate(shards, l)?, l)
}

/// DC over precomputed local matrices, e.g. local Stein matrices.
pub fn dc_from_matrices(locals: &[DenseMatrix], l: usize) -> Result<BaselineResult, LinalgError> {
    top_pairs(&dc_aggregate_matrices(locals, l)?, l)
}
