//! Python bindings. Matrices cross the boundary as lists of rows.

use std::sync::Mutex;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use distpca::baselines;
use distpca::cluster::{Cluster as CoreCluster, Operator, TransportKind};
use distpca::datagen::{
    balanced_sizes, make_covariance, make_pcr_instance, make_sim_instance, sample_gaussian, sample_skewed, shard,
    CovarianceSpec, Dataset, Link, Shard,
};
use distpca::experiment;
use distpca::linalg::{sym_eigendecompose, DenseMatrix, DenseVector};
use distpca::metrics::{self, SpectrumReference};
use distpca::solver::{self, EtaRule, SolverConfig, SolverResult};

type Rows = Vec<Vec<f64>>;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_matrix(rows: &Rows) -> PyResult<DenseMatrix> {
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    if refs.is_empty() || refs.iter().any(|r| r.len() != refs[0].len()) {
        return Err(value_err("expected a non-empty list of equal-length rows"));
    }
    Ok(DenseMatrix::from_rows(&refs))
}

fn to_rows(m: &DenseMatrix) -> Rows {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
}

fn eta_rule(rule: &str, c0: f64, eta: Option<f64>) -> PyResult<EtaRule> {
    Ok(match (rule, eta) {
        (_, Some(e)) => EtaRule::Fixed(e),
        ("practical", None) => EtaRule::Practical { c0 },
        ("scaled", None) => EtaRule::Scaled { c0 },
        ("theoretical", None) => EtaRule::Theoretical,
        (other, None) => return Err(value_err(format!("unknown eta rule '{other}'"))),
    })
}

/// Solver output: `v` as rows of the `d × S` basis.
#[pyclass(get_all, skip_from_py_object)]
#[derive(Clone)]
struct Solution {
    v: Rows,
    rayleigh: Vec<f64>,
    s: usize,
    saturated: bool,
    shifts: Vec<f64>,
    eta: f64,
    kappa: Option<f64>,
    max_uplink_bytes: u64,
}

impl From<SolverResult> for Solution {
    fn from(r: SolverResult) -> Self {
        Self {
            v: to_rows(&r.v),
            max_uplink_bytes: r.ledger.max_uplink_payload_bytes(),
            rayleigh: r.rayleigh,
            s: r.s,
            saturated: r.saturated,
            shifts: r.shifts,
            eta: r.eta,
            kappa: r.kappa,
        }
    }
}

#[pymethods]
impl Solution {
    /// First column of `v`.
    fn top(&self) -> Vec<f64> {
        self.v.iter().map(|row| row[0]).collect()
    }

    fn __repr__(&self) -> String {
        format!("Solution(s={}, eta={:.4}, rayleigh={:?})", self.s, self.eta, self.rayleigh)
    }
}

/// A coordinator with one worker per shard.
#[pyclass]
struct Cluster {
    inner: Mutex<CoreCluster>,
}

#[pymethods]
impl Cluster {
    /// `shards`: list of sample matrices. `responses` (one list per shard)
    /// are required for the Stein operator and for regression.
    #[new]
    #[pyo3(signature = (shards, responses=None, operator="covariance", transport="memory"))]
    fn new(shards: Vec<Rows>, responses: Option<Vec<Vec<f64>>>, operator: &str, transport: &str) -> PyResult<Self> {
        let operator = match operator {
            "covariance" => Operator::Covariance,
            "stein" => Operator::Stein,
            other => return Err(value_err(format!("unknown operator '{other}'"))),
        };
        let transport = match transport {
            "memory" => TransportKind::InMemory,
            "tcp" => TransportKind::TcpLoopback,
            other => return Err(value_err(format!("unknown transport '{other}'"))),
        };
        let mut parts = Vec::with_capacity(shards.len());
        for (i, rows) in shards.iter().enumerate() {
            let mut s = Shard::new(to_matrix(rows)?);
            if let Some(ys) = &responses {
                let y = ys.get(i).ok_or_else(|| value_err("one response list per shard"))?;
                s.y = Some(DenseVector::from(y.clone()));
            }
            parts.push(s);
        }
        let c = CoreCluster::spawn(&parts, operator, transport).map_err(value_err)?;
        Ok(Self { inner: Mutex::new(c) })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.lock().unwrap().k()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.lock().unwrap().d()
    }

    #[getter]
    fn sizes(&self) -> Vec<usize> {
        self.inner.lock().unwrap().sizes().to_vec()
    }

    /// Runs the distributed solver. Deflation modifies the workers' data,
    /// so each cluster answers one subspace query.
    #[pyo3(signature = (l=1, outer=30, inner=5, eta_rule="practical", c0=1.0, eta=None, delta=0.5, enlarge=false))]
    #[allow(clippy::too_many_arguments)]
    fn solve(
        &self,
        py: Python<'_>,
        l: usize,
        outer: usize,
        inner: usize,
        eta_rule: &str,
        c0: f64,
        eta: Option<f64>,
        delta: f64,
        enlarge: bool,
    ) -> PyResult<Solution> {
        let cfg = SolverConfig {
            outer,
            inner,
            eta: self::eta_rule(eta_rule, c0, eta)?,
            delta,
            l,
            enlarge,
            ..SolverConfig::default()
        };
        let mut guard = self.inner.lock().unwrap();
        let c: &mut CoreCluster = &mut guard;
        py.detach(|| solver::solve(c, &cfg)).map(Solution::from).map_err(runtime_err)
    }

    /// Global mean; subtracted from every worker's rows.
    fn center(&self) -> PyResult<Vec<f64>> {
        let mut c = self.inner.lock().unwrap();
        c.center().map(|v| v.as_slice().to_vec()).map_err(runtime_err)
    }

    /// PCR coefficients for a basis given as `d × S` rows.
    fn pcr_fit(&self, basis: Rows) -> PyResult<Vec<f64>> {
        let v = to_matrix(&basis)?;
        let mut c = self.inner.lock().unwrap();
        distpca::apps::pcr_fit(&mut c, &v)
            .map(|f| f.beta.as_slice().to_vec())
            .map_err(runtime_err)
    }

    /// Per-worker traffic counters.
    fn ledger<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let c = self.inner.lock().unwrap();
        c.ledger()
            .workers
            .iter()
            .map(|w| {
                let d = PyDict::new(py);
                d.set_item("downlink_messages", w.downlink_messages)?;
                d.set_item("downlink_payload_bytes", w.downlink_payload_bytes)?;
                d.set_item("uplink_messages", w.uplink_messages)?;
                d.set_item("uplink_gradient_bytes", w.uplink_gradient_bytes)?;
                d.set_item("uplink_other_bytes", w.uplink_other_bytes)?;
                d.set_item("overhead_bytes", w.overhead_bytes)?;
                Ok(d)
            })
            .collect()
    }
}

/// Synthetic data as `(rows, responses or None)`.
#[pyfunction]
#[pyo3(signature = (kind, n, d, delta=1.0, seed=1, skewness=4.0, noise_var=0.2, link="square"))]
#[allow(clippy::too_many_arguments)]
fn generate(
    kind: &str,
    n: usize,
    d: usize,
    delta: f64,
    seed: u64,
    skewness: f64,
    noise_var: f64,
    link: &str,
) -> PyResult<(Rows, Option<Vec<f64>>)> {
    let spec = CovarianceSpec::new(d, delta, seed);
    let data_seed = seed.wrapping_add(1);
    let ds: Dataset = match kind {
        "gaussian" => {
            let cov = make_covariance(&spec).map_err(value_err)?;
            sample_gaussian(n, &cov.sigma, data_seed).map_err(value_err)?
        }
        "skewed" => sample_skewed(n, &spec.eigenvalues(), skewness, data_seed).map_err(value_err)?,
        "pcr" => {
            let cov = make_covariance(&spec).map_err(value_err)?;
            make_pcr_instance(&cov, 3, n, noise_var, seed, data_seed).map_err(value_err)?
        }
        "sim" => {
            let link: Link = link.parse().map_err(value_err)?;
            make_sim_instance(d, n, link, noise_var, seed, data_seed).map_err(value_err)?
        }
        other => return Err(value_err(format!("unknown kind '{other}'"))),
    };
    Ok((to_rows(&ds.a), ds.y.map(|y| y.as_slice().to_vec())))
}

/// Shuffles and splits rows into `k` balanced shards.
#[pyfunction]
#[pyo3(signature = (rows, k, seed=0))]
fn split(rows: Rows, k: usize, seed: u64) -> PyResult<Vec<Rows>> {
    if k == 0 {
        return Err(value_err("k must be positive"));
    }
    let ds = Dataset::new(to_matrix(&rows)?);
    let parts = shard(&ds, &balanced_sizes(ds.n(), k), seed).map_err(value_err)?;
    Ok(parts.iter().map(|s| to_rows(&s.a)).collect())
}

/// Top-`l` eigenvectors of the pooled sample covariance, `d × l` rows.
#[pyfunction]
fn oracle_pca(rows: Rows, l: usize) -> PyResult<(Rows, Vec<f64>)> {
    let r = baselines::oracle_pca(&to_matrix(&rows)?, l).map_err(value_err)?;
    Ok((to_rows(&r.u_hat), r.lambdas))
}

/// Divide-and-conquer estimate from projector averaging.
#[pyfunction]
fn dc_pca(shards: Vec<Rows>, l: usize) -> PyResult<(Rows, Vec<f64>)> {
    let ms = shards.iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
    let r = baselines::dc_pca(&ms, l).map_err(value_err)?;
    Ok((to_rows(&r.u_hat), r.lambdas))
}

/// Descending eigenvalues and eigenvector rows of a symmetric matrix.
#[pyfunction]
fn eigh(matrix: Rows) -> PyResult<(Vec<f64>, Rows)> {
    let e = sym_eigendecompose(&to_matrix(&matrix)?).map_err(value_err)?;
    Ok((e.values.clone(), to_rows(&e.vectors)))
}

/// Gap-free error of a `d × l` basis against the pooled empirical spectrum
/// of `rows`.
#[pyfunction]
fn gapfree_error(rows: Rows, basis: Rows, delta: f64) -> PyResult<f64> {
    let reference = SpectrumReference::empirical(&to_matrix(&rows)?).map_err(value_err)?;
    let v = to_matrix(&basis)?;
    metrics::gapfree_error_top_l(&reference, &v, v.cols(), delta).map_err(value_err)
}

#[pyfunction]
fn sign_corrected_l2(b_hat: Vec<f64>, b_true: Vec<f64>) -> PyResult<f64> {
    metrics::sign_corrected_l2(&DenseVector::from(b_hat), &DenseVector::from(b_true)).map_err(value_err)
}

/// `(name, description)` for every built-in experiment preset.
#[pyfunction]
fn presets() -> Vec<(String, String)> {
    experiment::PRESETS
        .iter()
        .map(|p| (p.name.to_string(), p.description.to_string()))
        .collect()
}

/// Runs an experiment from `key = value` text (optionally on top of a
/// preset) and returns the CSV.
#[pyfunction]
#[pyo3(signature = (config, preset=None))]
fn run_experiment(py: Python<'_>, config: &str, preset: Option<&str>) -> PyResult<String> {
    let mut spec = match preset {
        Some(name) => experiment::preset(name).map_err(value_err)?,
        None => experiment::parse_config_str(config, "<config>").map_err(value_err)?,
    };
    if preset.is_some() {
        spec.apply_text(config, "<config>").map_err(value_err)?;
        spec.validate().map_err(value_err)?;
    }
    let records = py.detach(|| experiment::run_experiment(&spec)).map_err(runtime_err)?;
    Ok(experiment::to_csv(&records))
}

#[pymodule]
fn distpca_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Cluster>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_pca, m)?)?;
    m.add_function(wrap_pyfunction!(dc_pca, m)?)?;
    m.add_function(wrap_pyfunction!(eigh, m)?)?;
    m.add_function(wrap_pyfunction!(gapfree_error, m)?)?;
    m.add_function(wrap_pyfunction!(sign_corrected_l2, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
