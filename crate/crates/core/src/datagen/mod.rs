//! Synthetic data: structured covariances, Gaussian and skewed-beta
//! samples, PCR and single-index-model instances, sharding and dataset
//! files.

mod beta;
pub mod io;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal, StandardNormal};
use thiserror::Error;

use crate::linalg::{random_orthogonal, sym_eigendecompose, DenseMatrix, DenseVector, LinalgError};

pub use beta::{beta_shape_for_skewness, BetaShape, BETA_CONCENTRATION};

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid covariance spec: {0}")]
    InvalidSpec(String),
    #[error("covariance is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),
    #[error("skewness {0} cannot be produced by a beta distribution")]
    UnattainableSkewness(f64),
    #[error("shard sizes sum to {found}, expected {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("dataset is missing {0}")]
    Missing(&'static str),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed dataset file: {0}")]
    Format(String),
}

/// Eigenvalue profile `Λ = diag(1+kδ, …, 1+δ, 1, …, 1)` with `k` boosted
/// entries, rotated by a random orthogonal matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceSpec {
    pub d: usize,
    pub delta: f64,
    pub top_count: usize,
    pub seed: u64,
}

impl CovarianceSpec {
    pub fn new(d: usize, delta: f64, seed: u64) -> Self {
        Self {
            d,
            delta,
            top_count: 3,
            seed,
        }
    }

    fn validate(&self) -> Result<(), DataError> {
        if self.top_count == 0 || self.top_count > self.d {
            return Err(DataError::InvalidSpec(format!(
                "need 1 <= top_count <= d, got top_count={} d={}",
                self.top_count, self.d
            )));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(DataError::InvalidSpec(format!("delta must be >= 0, got {}", self.delta)));
        }
        Ok(())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.d)
            .map(|i| {
                if i < self.top_count {
                    1.0 + (self.top_count - i) as f64 * self.delta
                } else {
                    1.0
                }
            })
            .collect()
    }
}

/// Population truth attached to a dataset.
#[derive(Clone, Debug, Default)]
pub struct Truth {
    pub sigma: Option<DenseMatrix>,
    /// Population eigenvectors, columns paired with `lambda`.
    pub u: Option<DenseMatrix>,
    pub lambda: Option<Vec<f64>>,
    pub beta: Option<DenseVector>,
    pub gamma: Option<DenseVector>,
}

/// `Σ = U Λ Uᵀ` with its factors.
#[derive(Clone, Debug)]
pub struct Covariance {
    pub sigma: DenseMatrix,
    pub u: DenseMatrix,
    pub lambda: Vec<f64>,
}

impl Covariance {
    pub fn truth(&self) -> Truth {
        Truth {
            sigma: Some(self.sigma.clone()),
            u: Some(self.u.clone()),
            lambda: Some(self.lambda.clone()),
            ..Truth::default()
        }
    }
}

/// Sample matrix (rows are samples), optional responses and truth.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub a: DenseMatrix,
    pub y: Option<DenseVector>,
    pub truth: Option<Truth>,
}

impl Dataset {
    pub fn new(a: DenseMatrix) -> Self {
        Self {
            a,
            y: None,
            truth: None,
        }
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn d(&self) -> usize {
        self.a.cols()
    }
}

/// One machine's slice of a dataset.
#[derive(Clone, Debug)]
pub struct Shard {
    pub a: DenseMatrix,
    pub y: Option<DenseVector>,
}

impl Shard {
    pub fn new(a: DenseMatrix) -> Self {
        Self { a, y: None }
    }
}

pub fn make_covariance(spec: &CovarianceSpec) -> Result<Covariance, DataError> {
    spec.validate()?;
    let lambda = spec.eigenvalues();
    let u = random_orthogonal(spec.d, spec.seed);
    let mut scaled = u.clone();
    for (j, &l) in lambda.iter().enumerate() {
        scaled.col_mut(j).iter_mut().for_each(|x| *x *= l);
    }
    let sigma = scaled.matmul(&u.transpose()).symmetrized();
    Ok(Covariance { sigma, u, lambda })
}

fn normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    // row-major draw order so each sample consumes a contiguous block of the stream
    let mut z = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            z[(i, j)] = StandardNormal.sample(rng);
        }
    }
    z
}

/// Symmetric square root `Σ^{1/2}` through the eigendecomposition, so
/// singular PSD inputs are accepted.
pub fn psd_sqrt(sigma: &DenseMatrix) -> Result<DenseMatrix, DataError> {
    let e = sym_eigendecompose(sigma)?;
    if let Some(&min) = e.values.last() {
        if min < -1e-10 {
            return Err(DataError::NotPositiveSemidefinite(min));
        }
    }
    let mut scaled = e.vectors.clone();
    for (j, &l) in e.values.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        scaled.col_mut(j).iter_mut().for_each(|x| *x *= s);
    }
    Ok(scaled.matmul(&e.vectors.transpose()))
}

/// `n` i.i.d. draws `a_i = Σ^{1/2} z_i`.
pub fn sample_gaussian(n: usize, sigma: &DenseMatrix, seed: u64) -> Result<Dataset, DataError> {
    let root = psd_sqrt(sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = normal_matrix(n, sigma.rows(), &mut rng);
    // rows of Z·R equal (R z_i)ᵀ since R is symmetric
    Ok(Dataset::new(z.matmul(&root)))
}

/// Independent coordinates, coordinate `i` an affinely transformed beta
/// variate with mean 0, variance `lambda[i]` and the requested skewness.
/// Coordinates are not rotated, so the covariance is `diag(lambda)`.
pub fn sample_skewed(
    n: usize,
    lambda: &[f64],
    skewness: f64,
    seed: u64,
) -> Result<Dataset, DataError> {
    let shape = beta_shape_for_skewness(skewness)?;
    let dist = Beta::new(shape.alpha, shape.beta)
        .map_err(|_| DataError::UnattainableSkewness(skewness))?;
    let (mean, sd) = (shape.mean(), shape.variance().sqrt());
    let sign = if skewness < 0.0 { -1.0 } else { 1.0 };
    let scales: Vec<f64> = lambda.iter().map(|l| l.max(0.0).sqrt() / sd).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DenseMatrix::zeros(n, lambda.len());
    for i in 0..n {
        for (j, s) in scales.iter().enumerate() {
            let x: f64 = dist.sample(&mut rng);
            a[(i, j)] = sign * s * (x - mean);
        }
    }
    Ok(Dataset::new(a))
}

/// Principal-component-regression instance: `β* = U_top γ/‖γ‖` with
/// `γ ~ N(0, I_top)` drawn from `gamma_seed`, `A ~ N(0, Σ)` and
/// `y = Aβ* + ε`, `ε ~ N(0, σ²)`, both from `data_seed`.
pub fn make_pcr_instance(
    cov: &Covariance,
    top: usize,
    n: usize,
    noise_var: f64,
    gamma_seed: u64,
    data_seed: u64,
) -> Result<Dataset, DataError> {
    if top == 0 || top > cov.u.cols() {
        return Err(DataError::InvalidSpec(format!("top={top} out of range")));
    }
    let mut grng = ChaCha8Rng::seed_from_u64(gamma_seed);
    let gamma = DenseVector::from(
        (0..top)
            .map(|_| StandardNormal.sample(&mut grng))
            .collect::<Vec<f64>>(),
    );
    let gamma = gamma.scaled(1.0 / gamma.norm());
    let beta = cov.u.leading_columns(top).matvec(gamma.as_slice());

    let mut ds = sample_gaussian(n, &cov.sigma, data_seed)?;
    let mut y = ds.a.matvec(beta.as_slice());
    add_noise(&mut y, noise_var, data_seed)?;
    ds.y = Some(y);
    let mut truth = cov.truth();
    truth.beta = Some(beta);
    truth.gamma = Some(gamma);
    ds.truth = Some(truth);
    Ok(ds)
}

fn add_noise(y: &mut DenseVector, noise_var: f64, seed: u64) -> Result<(), DataError> {
    if noise_var == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, noise_var.sqrt())
        .map_err(|_| DataError::InvalidSpec(format!("noise variance {noise_var}")))?;
    // separate stream from the covariates
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for v in y.as_mut_slice() {
        *v += normal.sample(&mut rng);
    }
    Ok(())
}

/// Link functions of the single-index model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Link {
    /// `f(u) = u²`
    Square,
    /// `f(u) = |u|`
    Abs,
    /// `f(u) = 4u² + 3cos(u)`
    Mix,
}

impl Link {
    pub fn apply(self, u: f64) -> f64 {
        match self {
            Link::Square => u * u,
            Link::Abs => u.abs(),
            Link::Mix => 4.0 * u * u + 3.0 * u.cos(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Link::Square => "square",
            Link::Abs => "abs",
            Link::Mix => "mix",
        }
    }
}

impl std::str::FromStr for Link {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "square" => Ok(Link::Square),
            "abs" => Ok(Link::Abs),
            "mix" => Ok(Link::Mix),
            other => Err(format!("unknown link '{other}' (square|abs|mix)")),
        }
    }
}

/// Gaussian single-index model `y = f(⟨β*, a⟩) + ε` with `a ~ N(0, I_d)`
/// and `β*` a normalized standard-normal draw from `beta_seed`.
pub fn make_sim_instance(
    d: usize,
    n: usize,
    link: Link,
    noise_var: f64,
    beta_seed: u64,
    data_seed: u64,
) -> Result<Dataset, DataError> {
    let mut brng = ChaCha8Rng::seed_from_u64(beta_seed);
    let beta = DenseVector::from(
        (0..d)
            .map(|_| StandardNormal.sample(&mut brng))
            .collect::<Vec<f64>>(),
    );
    let beta = beta.scaled(1.0 / beta.norm());
    let mut rng = ChaCha8Rng::seed_from_u64(data_seed);
    let a = normal_matrix(n, d, &mut rng);
    let index = a.matvec(beta.as_slice());
    let mut y = DenseVector::from(index.as_slice().iter().map(|&u| link.apply(u)).collect::<Vec<_>>());
    add_noise(&mut y, noise_var, data_seed)?;
    Ok(Dataset {
        a,
        y: Some(y),
        truth: Some(Truth {
            beta: Some(beta),
            ..Truth::default()
        }),
    })
}

/// Equal-as-possible split of `n` into `k` parts (earlier parts get the remainder).
pub fn balanced_sizes(n: usize, k: usize) -> Vec<usize> {
    assert!(k >= 1);
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

/// Shuffles rows with a seeded permutation, then cuts contiguous blocks of
/// the requested sizes. Responses travel with their rows.
pub fn shard(data: &Dataset, sizes: &[usize], seed: u64) -> Result<Vec<Shard>, DataError> {
    let total: usize = sizes.iter().sum();
    if total != data.n() {
        return Err(DataError::SizeMismatch {
            expected: data.n(),
            found: total,
        });
    }
    let mut perm: Vec<usize> = (0..data.n()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = Vec::with_capacity(sizes.len());
    let mut off = 0;
    for &s in sizes {
        let idx = &perm[off..off + s];
        off += s;
        out.push(Shard {
            a: data.a.select_rows(idx),
            y: data
                .y
                .as_ref()
                .map(|y| DenseVector::from(idx.iter().map(|&i| y[i]).collect::<Vec<_>>())),
        });
    }
    Ok(out)
}

/// Sample mean, variance and skewness of a slice.
pub fn sample_moments(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &v in x {
        let c = v - mean;
        m2 += c * c;
        m3 += c * c * c;
    }
    m2 /= n;
    m3 /= n;
    (mean, m2, m3 / m2.powf(1.5))
}
