use super::matrix::dot;
use super::{eigen::check_symmetric, DenseMatrix, DenseVector, LinalgError};

const PIVOT_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = M`.
#[derive(Clone, Debug)]
pub struct SpdFactor {
    lower: DenseMatrix,
}

impl SpdFactor {
    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &DenseVector) -> Result<DenseVector, LinalgError> {
        let n = self.dim();
        if b.dim() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: b.dim(),
            });
        }
        let l = &self.lower;
        // L y = b
        let mut y = b.as_slice().to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        // Lᵀ x = y; column i of L is row i of Lᵀ
        for i in (0..n).rev() {
            let col = l.col(i);
            let s = y[i] - dot(&col[i + 1..], &y[i + 1..]);
            y[i] = s / l[(i, i)];
        }
        Ok(DenseVector::from(y))
    }
}

pub fn spd_factor(m: &DenseMatrix) -> Result<SpdFactor, LinalgError> {
    check_symmetric(m)?;
    let n = m.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > PIVOT_TOL) {
            return Err(LinalgError::NotPositiveDefinite { index: j, pivot });
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(SpdFactor { lower: l })
}
