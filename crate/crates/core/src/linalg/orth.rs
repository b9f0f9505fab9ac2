use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::eigen::fix_sign;
use super::matrix::{dot, norm};
use super::{DenseMatrix, LinalgError};

const RANK_TOL: f64 = 1e-10;

/// Orthonormalizes the columns of `m` with modified Gram-Schmidt followed by
/// one re-orthogonalization pass. Each column is normalized before
/// projection, so the rank test is scale-free.
pub fn gram_schmidt(m: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let (rows, cols) = m.shape();
    let mut q = DenseMatrix::zeros(rows, cols);
    let mut v = vec![0.0; rows];
    for j in 0..cols {
        v.copy_from_slice(m.col(j));
        let n0 = norm(&v);
        if n0 < RANK_TOL {
            return Err(LinalgError::RankDeficient { column: j });
        }
        v.iter_mut().for_each(|x| *x /= n0);
        for _pass in 0..2 {
            for k in 0..j {
                let qk = q.col(k);
                let r = dot(qk, &v);
                for (x, y) in v.iter_mut().zip(qk) {
                    *x -= r * y;
                }
            }
        }
        let n = norm(&v);
        if n < RANK_TOL {
            return Err(LinalgError::RankDeficient { column: j });
        }
        for (dst, x) in q.col_mut(j).iter_mut().zip(&v) {
            *dst = x / n;
        }
    }
    Ok(q)
}

/// Random `d × d` orthogonal matrix: i.i.d. standard normal entries
/// (column-major fill order, ChaCha8 stream seeded by `seed`) passed
/// through [`gram_schmidt`], then each column signed by the
/// largest-magnitude-entry rule.
pub fn random_orthogonal(d: usize, seed: u64) -> DenseMatrix {
    assert!(d >= 1, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let data: Vec<f64> = (0..d * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let g = DenseMatrix::from_col_major(d, d, data).expect("normal draws are finite");
        // a singular Gaussian draw has probability zero; redraw if it happens
        if let Ok(mut q) = gram_schmidt(&g) {
            for j in 0..d {
                fix_sign(q.col_mut(j));
            }
            return q;
        }
    }
}
