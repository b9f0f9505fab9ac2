//! Error measures: gap-free projection errors, variance capture,
//! sign-corrected distance and PCR prediction error.
//!
//! Index sets follow the literal comparisons `λ_l ≤ (1−δ)λ_ref`; a value
//! exactly at the threshold is included.

use thiserror::Error;

use crate::linalg::{sym_eigendecompose, DenseMatrix, DenseVector, EigenDecomposition, LinalgError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("vector norm {0} is not 1")]
    NotUnitVector(f64),
    #[error("columns are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("reference index {index} out of range for {len} values")]
    BadIndex { index: usize, len: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Descending eigenvalues with matching eigenvector columns: either the
/// pooled empirical spectrum or the population truth.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReference {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SpectrumReference {
    pub fn new(values: Vec<f64>, vectors: DenseMatrix) -> Self {
        assert_eq!(values.len(), vectors.cols());
        Self { values, vectors }
    }

    pub fn from_matrix(sigma: &DenseMatrix) -> Result<Self, MetricError> {
        Ok(sym_eigendecompose(sigma)?.into())
    }

    /// Spectrum of `AᵀA/n`.
    pub fn empirical(a: &DenseMatrix) -> Result<Self, MetricError> {
        Self::from_matrix(&a.gram().scaled(1.0 / a.rows() as f64))
    }

    pub fn dim(&self) -> usize {
        self.vectors.rows()
    }

    /// Indices `l` with `values[l] ≤ (1−δ)·values[reference]`.
    pub fn tail_indices(&self, reference: usize, delta: f64) -> Result<Vec<usize>, MetricError> {
        let top = *self.values.get(reference).ok_or(MetricError::BadIndex {
            index: reference,
            len: self.values.len(),
        })?;
        let threshold = (1.0 - delta) * top;
        Ok((0..self.values.len()).filter(|&l| self.values[l] <= threshold).collect())
    }
}

impl From<EigenDecomposition> for SpectrumReference {
    fn from(e: EigenDecomposition) -> Self {
        Self {
            values: e.values,
            vectors: e.vectors,
        }
    }
}

const UNIT_TOL: f64 = 1e-8;

fn check_unit(w: &DenseVector) -> Result<(), MetricError> {
    let n = w.norm();
    if (n - 1.0).abs() <= UNIT_TOL {
        Ok(())
    } else {
        Err(MetricError::NotUnitVector(n))
    }
}

fn check_dim(expected: usize, found: usize) -> Result<(), MetricError> {
    if expected == found {
        Ok(())
    } else {
        Err(MetricError::DimensionMismatch { expected, found })
    }
}

/// `Σ_{l: λ_l ≤ (1−δ)λ_1} ⟨u_l, w⟩²`.
pub fn gapfree_error_top1(reference: &SpectrumReference, w: &DenseVector, delta: f64) -> Result<f64, MetricError> {
    check_dim(reference.dim(), w.dim())?;
    check_unit(w)?;
    let err: f64 = reference
        .tail_indices(0, delta)?
        .into_iter()
        .map(|l| {
            let c = crate::linalg::dot(reference.vectors.col(l), w.as_slice());
            c * c
        })
        .sum();
    Ok(err.clamp(0.0, 1.0))
}

/// `‖Ũᵀ V‖₂²` where `Ũ` stacks reference vectors with `λ_l ≤ (1−δ)λ_L`
/// (`l` is 1-based, so `L` indexes `values[L-1]`).
pub fn gapfree_error_top_l(
    reference: &SpectrumReference,
    v: &DenseMatrix,
    l: usize,
    delta: f64,
) -> Result<f64, MetricError> {
    check_dim(reference.dim(), v.rows())?;
    if l == 0 {
        return Err(MetricError::BadIndex { index: 0, len: reference.values.len() });
    }
    let dev = v.gram().max_abs_diff(&DenseMatrix::identity(v.cols()));
    if dev > UNIT_TOL {
        return Err(MetricError::NotOrthonormal(dev));
    }
    let tail = reference.tail_indices(l - 1, delta)?;
    if tail.is_empty() || v.cols() == 0 {
        return Ok(0.0);
    }
    let u = reference.vectors.select_columns(&tail);
    // Gram of the smaller side of ŨᵀV
    let cross = u.t_matmul(v);
    let small = if cross.rows() <= cross.cols() {
        cross.outer_gram()
    } else {
        cross.gram()
    };
    let top = sym_eigendecompose(&small)?.values[0];
    Ok(top.clamp(0.0, 1.0))
}

/// `wᵀ Σ w`.
pub fn variance_captured(sigma: &DenseMatrix, w: &DenseVector) -> Result<f64, MetricError> {
    check_dim(sigma.rows(), w.dim())?;
    check_unit(w)?;
    Ok(w.dot(&sigma.matvec(w.as_slice())))
}

/// `captured > (1−δ)(1−ε)λ₁`. When `ε ≥ 1` the bound is vacuous and only
/// `captured ≥ 0` is required.
pub fn capture_bound_holds(lambda1: f64, delta: f64, eps: f64, captured: f64) -> bool {
    if eps >= 1.0 {
        captured >= 0.0
    } else {
        captured > (1.0 - delta) * (1.0 - eps) * lambda1
    }
}

/// `min_{t = ±1} ‖t·b_hat − b_true‖₂`.
pub fn sign_corrected_l2(b_hat: &DenseVector, b_true: &DenseVector) -> Result<f64, MetricError> {
    check_dim(b_true.dim(), b_hat.dim())?;
    let plus = b_hat.sub(b_true).norm();
    let minus = b_hat.scaled(-1.0).sub(b_true).norm();
    Ok(plus.min(minus))
}

/// `(1/n) ‖A(b_hat − b_true)‖₂²`.
pub fn pcr_prediction_error(a: &DenseMatrix, b_hat: &DenseVector, b_true: &DenseVector) -> Result<f64, MetricError> {
    check_dim(a.cols(), b_hat.dim())?;
    check_dim(a.cols(), b_true.dim())?;
    let r = a.matvec(b_hat.sub(b_true).as_slice());
    Ok(r.dot(&r) / a.rows() as f64)
}

/// Relative gap `(λ_L − λ_{L+1}) / λ_L` of a descending spectrum.
pub fn relative_gap(values: &[f64], l: usize) -> f64 {
    (values[l - 1] - values[l]) / values[l - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_orthogonal;
    use proptest::prelude::*;

    fn reference(values: &[f64], seed: u64) -> SpectrumReference {
        SpectrumReference::new(values.to_vec(), random_orthogonal(values.len(), seed))
    }

    fn profile(d: usize) -> Vec<f64> {
        let mut v = vec![1.0; d];
        v[..3].copy_from_slice(&[4.0, 3.0, 2.0]);
        v
    }

    #[test]
    fn top1_extremes() {
        let r = reference(&[3.0, 2.0, 1.0, 0.5], 1);
        assert!(gapfree_error_top1(&r, &r.vectors.column(0), 0.4).unwrap() < 1e-15);
        assert!((gapfree_error_top1(&r, &r.vectors.column(3), 0.4).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            gapfree_error_top1(&r, &DenseVector::from(vec![1.0, 1.0, 0.0, 0.0]), 0.4),
            Err(MetricError::NotUnitVector(_))
        ));
    }

    #[test]
    fn delta_one_empties_index_set() {
        let r = reference(&profile(10), 2);
        let w = DenseVector::from(vec![1.0 / 10f64.sqrt(); 10]);
        assert_eq!(gapfree_error_top1(&r, &w, 1.0).unwrap(), 0.0);
        assert!(r.tail_indices(0, 1.0).unwrap().is_empty());
    }

    #[test]
    fn threshold_is_inclusive() {
        // (1 − 0.5)·4 = 2 exactly: index 2 belongs to the tail
        let r = reference(&[4.0, 3.0, 2.0, 1.0], 3);
        assert_eq!(r.tail_indices(0, 0.5).unwrap(), vec![2, 3]);
        let e = gapfree_error_top1(&r, &r.vectors.column(2), 0.5).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn top_l_extremes() {
        let r = reference(&profile(6), 4);
        let v = r.vectors.leading_columns(3);
        assert!(gapfree_error_top_l(&r, &v, 3, 0.25).unwrap() < 1e-15);
        let inside = r.vectors.select_columns(&[4, 5]);
        assert!((gapfree_error_top_l(&r, &inside, 2, 0.1).unwrap() - 1.0).abs() < 1e-12);
        let bad = DenseMatrix::from_columns(6, &[DenseVector::unit(6, 0), DenseVector::unit(6, 0)]);
        assert!(matches!(gapfree_error_top_l(&r, &bad, 2, 0.1), Err(MetricError::NotOrthonormal(_))));
    }

    fn power_oracle(m: &DenseMatrix) -> f64 {
        let mut x = DenseVector::from(vec![1.0; m.rows()]);
        let mut lambda = 0.0;
        for _ in 0..20_000 {
            let y = m.matvec(x.as_slice());
            lambda = y.norm();
            if lambda == 0.0 {
                return 0.0;
            }
            x = y.scaled(1.0 / lambda);
        }
        lambda
    }

    #[test]
    fn top_l_matches_power_iteration() {
        let r = reference(&[5.0, 4.0, 3.0, 2.0, 1.5, 1.0], 5);
        for seed in 0..5 {
            let v = random_orthogonal(6, 100 + seed).leading_columns(2);
            let tail = r.tail_indices(1, 0.3).unwrap();
            let u = r.vectors.select_columns(&tail);
            let vtu = v.t_matmul(&u);
            let oracle = power_oracle(&vtu.outer_gram());
            let got = gapfree_error_top_l(&r, &v, 2, 0.3).unwrap();
            assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
        }
    }

    #[test]
    fn capture() {
        let sigma = DenseMatrix::diag(&[3.0, 1.0]);
        let u1 = DenseVector::unit(2, 0);
        assert_eq!(variance_captured(&sigma, &u1).unwrap(), 3.0);
        for (d, e) in [(0.1, 0.1), (0.9, 0.5), (0.5, 0.99)] {
            assert!(capture_bound_holds(3.0, d, e, 3.0));
        }
        assert!(capture_bound_holds(3.0, 0.5, 1.0, 0.0));
        assert!(!capture_bound_holds(3.0, 0.1, 0.0, 2.0));
    }

    #[test]
    fn sign_corrected() {
        let b = DenseVector::from(vec![0.6, 0.8]);
        assert_eq!(sign_corrected_l2(&b.scaled(-1.0), &b).unwrap(), 0.0);
        let e1 = DenseVector::from(vec![1.0, 0.0]);
        let e2 = DenseVector::from(vec![0.0, 1.0]);
        assert!((sign_corrected_l2(&e1, &e2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((sign_corrected_l2(&e1, &b).unwrap() - 0.8f64.sqrt()).abs() < 1e-15);
        assert!(sign_corrected_l2(&e1, &DenseVector::zeros(3)).is_err());
    }

    #[test]
    fn prediction_error() {
        let a = DenseMatrix::identity(4);
        let b = DenseVector::from(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(pcr_prediction_error(&a, &b, &b).unwrap(), 0.0);
        let b2 = b.add(&DenseVector::unit(4, 0));
        assert_eq!(pcr_prediction_error(&a, &b2, &b).unwrap(), 0.25);
        // A = [[1,2],[3,4],[5,6]], diff = (1,-1) → A·diff = (-1,-1,-1), mean square 1
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let e = pcr_prediction_error(&a, &DenseVector::from(vec![1.0, -1.0]), &DenseVector::zeros(2)).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn metrics_bounded_and_sign_invariant(seed in 0u64..1000, delta in 0.05f64..0.95, l in 1usize..4) {
            let r = reference(&[6.0, 5.0, 3.0, 2.0, 1.0, 1.0, 0.5], seed);
            let q = random_orthogonal(7, seed + 7);
            let v = q.leading_columns(l);
            let e = gapfree_error_top_l(&r, &v, l, delta).unwrap();
            prop_assert!((0.0..=1.0).contains(&e));
            let mut flipped = v.select_columns(&(0..l).rev().collect::<Vec<_>>());
            flipped.col_mut(0).iter_mut().for_each(|x| *x = -*x);
            let e2 = gapfree_error_top_l(&r, &flipped, l, delta).unwrap();
            prop_assert!((e - e2).abs() < 1e-12);

            let w = q.column(0);
            let t = gapfree_error_top1(&r, &w, delta).unwrap();
            prop_assert!((0.0..=1.0).contains(&t));
            let t2 = gapfree_error_top1(&r, &w.scaled(-1.0), delta).unwrap();
            prop_assert!((t - t2).abs() < 1e-12);
        }
    }
}
