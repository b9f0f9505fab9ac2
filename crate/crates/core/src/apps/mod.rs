//! Downstream applications on top of the distributed eigensolver:
//! data centering, principal component regression and the Gaussian
//! single-index model.

use thiserror::Error;

use crate::cluster::{Cluster, ClusterError, Operator, TransportKind};
use crate::datagen::Shard;
use crate::linalg::{spd_factor, DenseMatrix, DenseVector, LinalgError};
use crate::solver::{self, SolverConfig, SolverError, SolverResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AppError {
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("normal equations are singular (pivot {pivot:.3e} at {index})")]
    SingularNormalEquations { index: usize, pivot: f64 },
    #[error(transparent)]
    Linalg(LinalgError),
}

impl From<LinalgError> for AppError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::NotPositiveDefinite { index, pivot } => AppError::SingularNormalEquations { index, pivot },
            e => AppError::Linalg(e),
        }
    }
}

/// Global mean, subtracted from every row on every worker.
pub fn distributed_center(cluster: &mut Cluster) -> Result<DenseVector, AppError> {
    Ok(cluster.center()?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcrFit {
    /// Coefficients in the `V_S` basis.
    pub gamma: DenseVector,
    /// `V_S γ`.
    pub beta: DenseVector,
    pub s: usize,
}

fn solve_normal(v: &DenseMatrix, gram: &DenseMatrix, rhs: &DenseVector) -> Result<PcrFit, AppError> {
    let gamma = spd_factor(&gram.symmetrized())?.solve(rhs)?;
    let beta = v.matvec(gamma.as_slice());
    Ok(PcrFit { gamma, beta, s: v.cols() })
}

/// OLS on the projected design `Ã = A V_S` from summed per-worker normal
/// equations.
pub fn pcr_fit(cluster: &mut Cluster, v: &DenseMatrix) -> Result<PcrFit, AppError> {
    let (gram, rhs) = cluster.normal_equations(v)?;
    solve_normal(v, &gram, &rhs)
}

/// Single-machine PCR on pooled data for a given basis.
pub fn pooled_pcr(a: &DenseMatrix, y: &DenseVector, v: &DenseMatrix) -> Result<PcrFit, AppError> {
    let at = a.matmul(v);
    solve_normal(v, &at.gram(), &at.t_matvec(y.as_slice()))
}

/// Which subspace feeds the regression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PcrBasis {
    /// `V_L`; the caller asserts an eigengap after `L`.
    AssumeGap,
    /// Enlarged `V_S` selected with the solver's `δ`.
    Enlarged,
}

/// Distributed PCR: subspace estimation followed by the regression.
/// Deflation modifies the workers' data, so the subspace is estimated on a
/// separate cluster from the one holding the responses.
pub fn distributed_pcr(
    shards: &[Shard],
    cfg: &SolverConfig,
    basis: PcrBasis,
    transport: TransportKind,
) -> Result<(PcrFit, SolverResult), AppError> {
    let mut pca = Cluster::spawn(shards, Operator::Covariance, transport.clone())?;
    let res = match basis {
        PcrBasis::AssumeGap => solver::top_l_subspace(&mut pca, cfg)?,
        PcrBasis::Enlarged => solver::enlarged_subspace(&mut pca, cfg)?,
    };
    drop(pca);
    let mut reg = Cluster::spawn(shards, Operator::Covariance, transport)?;
    let fit = pcr_fit(&mut reg, &res.v)?;
    Ok((fit, res))
}

/// Pooled second-order Stein matrix `(1/n) Σ y_i (a_i a_iᵀ − I)`.
pub fn stein_matrix(a: &DenseMatrix, y: &DenseVector) -> DenseMatrix {
    let n = a.rows() as f64;
    let mut m = a.weighted_gram(y.as_slice()).scaled(1.0 / n);
    let ybar = y.as_slice().iter().sum::<f64>() / n;
    for i in 0..a.cols() {
        m[(i, i)] -= ybar;
    }
    m
}

/// Single-index direction: the distributed top eigenvector of the Stein
/// matrix. The cluster must run the Stein operator.
pub fn sim_fit(cluster: &mut Cluster, cfg: &SolverConfig) -> Result<SolverResult, AppError> {
    assert_eq!(cluster.operator(), Operator::Stein, "sim_fit needs a Stein cluster");
    Ok(solver::top_eigenvector(cluster, cfg)?)
}

/// Spawns a Stein cluster from shards carrying responses.
pub fn spawn_sim_cluster(shards: &[Shard], transport: TransportKind) -> Result<Cluster, AppError> {
    Ok(Cluster::spawn(shards, Operator::Stein, transport)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::spawn_cluster;
    use crate::datagen::{
        balanced_sizes, make_covariance, make_pcr_instance, make_sim_instance, shard, CovarianceSpec, Link,
    };
    use crate::linalg::sym_eigendecompose;
    use crate::metrics::sign_corrected_l2;

    #[test]
    fn centering_examples() {
        let a = DenseMatrix::from_rows(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let b = DenseMatrix::from_rows(&[&[3.0, 0.0], &[3.0, 0.0]]);
        let mut c = spawn_cluster(&[a, b], TransportKind::InMemory).unwrap();
        assert_eq!(distributed_center(&mut c).unwrap().as_slice(), &[2.0, 0.0]);
        let again = distributed_center(&mut c).unwrap();
        assert!(again.norm() < 1e-12);
        let t = c.ledger().workers[0];
        // two rounds: one mean up and one mean down each
        assert_eq!(t.uplink_other_bytes, 2 * 16);
        assert_eq!(t.downlink_payload_bytes, 2 * 16);
    }

    fn pcr_data(k: usize, seed: u64) -> (crate::datagen::Dataset, Vec<Shard>) {
        let cov = make_covariance(&CovarianceSpec::new(8, 1.0, seed)).unwrap();
        let ds = make_pcr_instance(&cov, 3, 400, 0.2, seed, seed + 1).unwrap();
        let shards = shard(&ds, &balanced_sizes(400, k), seed + 2).unwrap();
        (ds, shards)
    }

    #[test]
    fn distributed_equals_pooled() {
        let (ds, shards) = pcr_data(4, 3);
        let v = crate::linalg::random_orthogonal(8, 9).leading_columns(3);
        let mut c = Cluster::spawn(&shards, Operator::Covariance, TransportKind::InMemory).unwrap();
        let (gram, rhs) = c.normal_equations(&v).unwrap();
        let at = ds.a.matmul(&v);
        assert!(gram.max_abs_diff(&at.gram()) < 1e-12 * gram.max_abs());
        assert!(rhs.max_abs_diff(&at.t_matvec(ds.y.as_ref().unwrap().as_slice())) < 1e-12 * rhs.norm());
        let fit = pcr_fit(&mut c, &v).unwrap();
        let pooled = pooled_pcr(&ds.a, ds.y.as_ref().unwrap(), &v).unwrap();
        assert!(fit.gamma.max_abs_diff(&pooled.gamma) < 1e-10);
        assert!(fit.beta.max_abs_diff(&v.matvec(fit.gamma.as_slice())) < 1e-12);
    }

    #[test]
    fn noiseless_exact_recovery() {
        let cov = make_covariance(&CovarianceSpec::new(6, 1.0, 4)).unwrap();
        let ds = make_pcr_instance(&cov, 3, 200, 0.0, 1, 2).unwrap();
        let shards = shard(&ds, &[100, 100], 0).unwrap();
        let mut c = Cluster::spawn(&shards, Operator::Covariance, TransportKind::InMemory).unwrap();
        let fit = pcr_fit(&mut c, &cov.u.leading_columns(3)).unwrap();
        let beta = ds.truth.unwrap().beta.unwrap();
        assert!(fit.beta.max_abs_diff(&beta) < 1e-8);
    }

    #[test]
    fn singular_normal_equations() {
        let a = DenseMatrix::from_rows(&[&[1.0, 0.0], &[2.0, 0.0]]);
        let mut s = Shard::new(a);
        s.y = Some(DenseVector::from(vec![1.0, 2.0]));
        let mut c = Cluster::spawn(&[s], Operator::Covariance, TransportKind::InMemory).unwrap();
        let v = DenseMatrix::from_rows(&[&[0.0], &[1.0]]);
        assert!(matches!(pcr_fit(&mut c, &v), Err(AppError::SingularNormalEquations { .. })));
    }

    #[test]
    fn pcr_pipeline_runs() {
        let (ds, shards) = pcr_data(4, 5);
        let cfg = SolverConfig { l: 3, outer: 30, inner: 5, delta: 0.2, ..Default::default() };
        let (fit, res) = distributed_pcr(&shards, &cfg, PcrBasis::AssumeGap, TransportKind::InMemory).unwrap();
        assert_eq!(fit.s, 3);
        assert_eq!(res.s, 3);
        let beta = ds.truth.unwrap().beta.unwrap();
        assert!(fit.beta.sub(&beta).norm() < 0.2);
    }

    #[test]
    fn sim_single_worker_matches_pooled() {
        let ds = make_sim_instance(6, 3000, Link::Square, 0.2, 1, 2).unwrap();
        let oracle = sym_eigendecompose(&stein_matrix(&ds.a, ds.y.as_ref().unwrap())).unwrap();
        let shards = shard(&ds, &[3000], 3).unwrap();
        let mut c = spawn_sim_cluster(&shards, TransportKind::InMemory).unwrap();
        let cfg = SolverConfig { outer: 40, inner: 3, ..Default::default() };
        let r = sim_fit(&mut c, &cfg).unwrap();
        assert!(sign_corrected_l2(&r.top(), &oracle.vectors.column(0)).unwrap() < 1e-6);
    }

    #[test]
    fn stein_matrix_symmetric_and_zero_response() {
        let ds = make_sim_instance(4, 100, Link::Mix, 0.0, 1, 2).unwrap();
        assert_eq!(stein_matrix(&ds.a, ds.y.as_ref().unwrap()).asymmetry(), 0.0);
        let zero = DenseVector::zeros(100);
        assert_eq!(stein_matrix(&ds.a, &zero).max_abs(), 0.0);
    }
}
