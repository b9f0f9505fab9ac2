//! Cyclic Jacobi eigensolver for dense symmetric matrices.
//!
//! Output is fully deterministic: eigenvalues descending (ties keep the
//! order Jacobi produced them in, which is the diagonal index order), and
//! every eigenvector is signed so that its largest-magnitude entry is
//! positive, ties going to the lowest index.

use super::{DenseMatrix, LinalgError};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

/// Sorted eigenpairs of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Non-increasing.
    pub values: Vec<f64>,
    /// Orthonormal columns; column `i` pairs with `values[i]`.
    pub vectors: DenseMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Top-`k` eigenvectors as a `d × k` panel.
    pub fn leading_vectors(&self, k: usize) -> DenseMatrix {
        self.vectors.leading_columns(k)
    }

    /// `V · diag(values) · Vᵀ`
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            scaled.col_mut(j).iter_mut().for_each(|x| *x *= v);
        }
        scaled.matmul(&self.vectors.transpose())
    }
}

/// Checks squareness and (relative) symmetry of `m`.
pub(crate) fn check_symmetric(m: &DenseMatrix) -> Result<(), LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOL * scale {
        return Err(LinalgError::NotSymmetric {
            asymmetry: asym / scale,
        });
    }
    Ok(())
}

pub fn sym_eigendecompose(m: &DenseMatrix) -> Result<EigenDecomposition, LinalgError> {
    check_symmetric(m)?;
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = DenseMatrix::identity(n);

    let target = OFF_DIAGONAL_TOL * a.frobenius_norm();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > target {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep index order
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = v.select_columns(&order);
    for j in 0..n {
        fix_sign(vectors.col_mut(j));
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Flips `col` so its largest-magnitude entry (lowest index on ties) is positive.
pub fn fix_sign(col: &mut [f64]) {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, x) in col.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if !col.is_empty() && col[best] < 0.0 {
        col.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn sym_spectral_norm(m: &DenseMatrix) -> Result<f64, LinalgError> {
    let e = sym_eigendecompose(m)?;
    Ok(e.values.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation zeroing `a[p][q]`.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    // theta == 0 gives signum 1 → t = 1 (45° rotation)
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let n = a.rows();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp;
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq;
    }
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}
