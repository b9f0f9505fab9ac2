//! Monte-Carlo experiment runner: data generation, the three estimators,
//! evaluation against population truth and CSV output.

mod config;
mod csv;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

pub use config::{parse_config, parse_config_str, preset, ConfigError, Preset, KEYS, PRESETS};
pub use csv::{mean_records, to_csv, write_csv, CSV_HEADER};

use crate::apps::{self, pooled_pcr, stein_matrix, AppError, PcrBasis};
use crate::baselines::{self, BaselineResult};
use crate::cluster::{Cluster, ClusterError, Operator, TransportKind};
use crate::datagen::{
    balanced_sizes, make_covariance, make_pcr_instance, make_sim_instance, sample_gaussian, sample_skewed, shard,
    Covariance, CovarianceSpec, DataError, Dataset, Link, Shard,
};
use crate::linalg::{DenseMatrix, DenseVector, LinalgError};
use crate::metrics::{
    gapfree_error_top1, gapfree_error_top_l, pcr_prediction_error, relative_gap, sign_corrected_l2, MetricError,
    SpectrumReference,
};
use crate::solver::{self, EtaRule, SolverConfig, SolverError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    VaryOuterIterations,
    VaryEigengap,
    VaryMachines,
    Pcr,
    Sim,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::VaryOuterIterations => "vary-outer-iterations",
            ExperimentKind::VaryEigengap => "vary-eigengap",
            ExperimentKind::VaryMachines => "vary-machines",
            ExperimentKind::Pcr => "pcr",
            ExperimentKind::Sim => "sim",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [
            ExperimentKind::VaryOuterIterations,
            ExperimentKind::VaryEigengap,
            ExperimentKind::VaryMachines,
            ExperimentKind::Pcr,
            ExperimentKind::Sim,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown kind '{s}'"))
    }
}

/// Which `η` rule the distributed solver uses, with the experiment's `c0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaChoice {
    /// `η = c₀ √(d/m)`.
    Practical,
    /// `η = c₀ λ₁(Σ̂₁) √(d/m)`.
    Scaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportChoice {
    Memory,
    Tcp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Ours,
    Dc,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ours, Method::Dc, Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ours => "ours",
            Method::Dc => "dc",
            Method::Oracle => "oracle",
        }
    }
}

/// What the `error` column measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    /// Gap-free subspace error against population eigenvectors.
    Gapfree,
    /// `(1/n)‖A(β̂ − β*)‖²` on the pooled sample.
    PcrPrediction,
    /// `‖β̂ − β*‖₂`.
    BetaL2,
    /// `min_± ‖±β̂ − β*‖₂`.
    SignCorrectedL2,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Gapfree => "gapfree",
            Metric::PcrPrediction => "pcr_prediction",
            Metric::BetaL2 => "beta_l2",
            Metric::SignCorrectedL2 => "sign_corrected_l2",
        }
    }
}

/// A full experiment description. List-valued fields are swept as a
/// Cartesian product.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub d: usize,
    /// Samples per machine.
    pub m: usize,
    pub k: Vec<usize>,
    /// Covariance gap parameter: `λ = (1+3δ, 1+2δ, 1+δ, 1, …)`.
    pub delta: Vec<f64>,
    pub l: Vec<usize>,
    pub t: Vec<usize>,
    pub t_inner: Vec<usize>,
    pub eta: EtaChoice,
    pub c0: f64,
    pub skewness: Option<f64>,
    pub noise_var: f64,
    pub link: Link,
    pub monte_carlo: usize,
    pub seed: u64,
    pub transport: TransportChoice,
    /// External worker addresses; used with `Tcp` when their count matches K.
    pub endpoints: Vec<String>,
    pub out: Option<PathBuf>,
    pub record_timing: bool,
    pub pcr_basis: PcrBasis,
    /// Solver `δ` for the enlarged PCR basis.
    pub solver_delta: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::VaryOuterIterations,
            d: 50,
            m: 500,
            k: vec![200],
            delta: vec![1.0],
            l: vec![1],
            t: vec![40],
            t_inner: vec![10],
            eta: EtaChoice::Scaled,
            c0: 1.5,
            skewness: None,
            noise_var: 0.2,
            link: Link::Square,
            monte_carlo: 20,
            seed: 1,
            transport: TransportChoice::Memory,
            endpoints: Vec::new(),
            out: None,
            record_timing: false,
            pcr_basis: PcrBasis::AssumeGap,
            solver_delta: 0.2,
        }
    }
}

/// One sweep point; the outer-iteration list is evaluated inside a cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub k: usize,
    pub delta: f64,
    pub l: usize,
    pub t_inner: usize,
    /// Index of the `(K, δ)` pair; cells sharing it share data.
    pub data_key: usize,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K={} delta={} L={} T'={}", self.k, self.delta, self.l, self.t_inner)
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.d == 0 || self.m == 0 {
            return bad("d and m must be positive".into());
        }
        if self.monte_carlo == 0 {
            return bad("monte_carlo must be at least 1".into());
        }
        for (name, list) in [("k", &self.k), ("l", &self.l), ("t", &self.t), ("t_inner", &self.t_inner)] {
            if list.is_empty() || list.contains(&0) {
                return bad(format!("{name} entries must be positive"));
            }
        }
        if self.delta.is_empty() || self.delta.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return bad("delta entries must be finite and >= 0".into());
        }
        if let Some(&l) = self.l.iter().max() {
            if l >= self.d {
                return bad(format!("L = {l} must be below d = {}", self.d));
            }
        }
        if self.kind == ExperimentKind::Pcr && self.l.iter().any(|&l| l > 3) {
            return bad("pcr supports L <= 3 (the signal lives in the top three directions)".into());
        }
        if !(self.c0.is_finite() && self.c0 > 0.0) {
            return bad("c0 must be positive".into());
        }
        if !(self.noise_var.is_finite() && self.noise_var >= 0.0) {
            return bad("noise_var must be >= 0".into());
        }
        if !(self.solver_delta > 0.0 && self.solver_delta < 1.0) {
            return bad("solver_delta must lie in (0, 1)".into());
        }
        Ok(())
    }

    /// Sweep cells in `(K, δ, L, T')` order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for (ki, &k) in self.k.iter().enumerate() {
            for (di, &delta) in self.delta.iter().enumerate() {
                for &l in &self.l {
                    for &t_inner in &self.t_inner {
                        out.push(Cell {
                            k,
                            delta,
                            l,
                            t_inner,
                            data_key: ki * self.delta.len() + di,
                        });
                    }
                }
            }
        }
        out
    }

    fn transport_kind(&self, k: usize) -> TransportKind {
        match self.transport {
            TransportChoice::Memory => TransportKind::InMemory,
            TransportChoice::Tcp if self.endpoints.len() == k => TransportKind::Tcp(self.endpoints.clone()),
            TransportChoice::Tcp => TransportKind::TcpLoopback,
        }
    }

    fn solver_config(&self, cell: &Cell, t: usize) -> SolverConfig {
        SolverConfig {
            outer: t,
            inner: cell.t_inner,
            eta: match self.eta {
                EtaChoice::Practical => EtaRule::Practical { c0: self.c0 },
                EtaChoice::Scaled => EtaRule::Scaled { c0: self.c0 },
            },
            delta: self.solver_delta,
            l: cell.l,
            ..SolverConfig::default()
        }
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub kind: ExperimentKind,
    /// `None` on mean rows.
    pub rep: Option<usize>,
    pub k: usize,
    pub m: usize,
    pub d: usize,
    pub delta: f64,
    pub l: usize,
    pub t: usize,
    pub t_inner: usize,
    pub skewness: Option<f64>,
    pub noise_var: Option<f64>,
    pub link: Option<Link>,
    pub method: Method,
    pub metric: Metric,
    pub error: f64,
    pub log10_error: f64,
    pub wall_ms: Option<f64>,
    /// Maximum over workers of uplink payload bytes.
    pub uplink_bytes: f64,
}

pub fn log10_error(error: f64) -> f64 {
    error.max(1e-300).log10()
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("rep {rep}, {cell}: {source}")]
    Cell {
        rep: usize,
        cell: String,
        #[source]
        source: Box<ExperimentError>,
    },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    App(#[from] AppError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

impl ExperimentError {
    pub fn is_config(&self) -> bool {
        matches!(self, ExperimentError::Config(_))
    }
}

const TAG_COV: u64 = 1;
const TAG_DATA: u64 = 2;
const TAG_SHARD: u64 = 3;
const TAG_FIXED: u64 = 4;

/// SplitMix64 over `(seed, tag, index)`.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    for _ in 0..2 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

/// Generated data for one repetition and one `(K, δ)` pair.
#[derive(Clone, Debug)]
pub struct Instance {
    pub data: Dataset,
    pub shards: Vec<Shard>,
    /// Population spectrum (PCA and PCR kinds).
    pub truth: Option<SpectrumReference>,
    /// Population coefficient (PCR and SIM kinds).
    pub beta: Option<DenseVector>,
}

/// Deterministically regenerates the data behind `(rep, cell)`.
pub fn instance(spec: &ExperimentSpec, cell: &Cell, rep: usize) -> Result<Instance, ExperimentError> {
    let base = spec.seed.wrapping_add(rep as u64);
    let key = cell.data_key as u64;
    let n = spec.m * cell.k;
    let fixed_seed = derive_seed(spec.seed, TAG_FIXED, 0);
    let data_seed = derive_seed(base, TAG_DATA, key);
    let (data, truth, beta) = match spec.kind {
        ExperimentKind::Sim => {
            let ds = make_sim_instance(spec.d, n, spec.link, spec.noise_var, fixed_seed, data_seed)?;
            let beta = ds.truth.as_ref().and_then(|t| t.beta.clone());
            (ds, None, beta)
        }
        ExperimentKind::Pcr => {
            let cov = make_covariance(&CovarianceSpec::new(spec.d, cell.delta, derive_seed(base, TAG_COV, key)))?;
            let ds = make_pcr_instance(&cov, 3, n, spec.noise_var, fixed_seed, data_seed)?;
            let beta = ds.truth.as_ref().and_then(|t| t.beta.clone());
            (ds, Some(population(&cov)), beta)
        }
        _ => match spec.skewness {
            Some(skew) => {
                let lambda = CovarianceSpec::new(spec.d, cell.delta, 0).eigenvalues();
                let ds = sample_skewed(n, &lambda, skew, data_seed)?;
                let truth = SpectrumReference::new(lambda, DenseMatrix::identity(spec.d));
                (ds, Some(truth), None)
            }
            None => {
                let cov =
                    make_covariance(&CovarianceSpec::new(spec.d, cell.delta, derive_seed(base, TAG_COV, key)))?;
                let ds = sample_gaussian(n, &cov.sigma, data_seed)?;
                (ds, Some(population(&cov)), None)
            }
        },
    };
    let shards = shard(&data, &balanced_sizes(n, cell.k), derive_seed(base, TAG_SHARD, key))?;
    Ok(Instance { data, shards, truth, beta })
}

fn population(cov: &Covariance) -> SpectrumReference {
    SpectrumReference::new(cov.lambda.clone(), cov.u.clone())
}

struct Outcome {
    method: Method,
    t: Option<usize>,
    metric: Metric,
    error: f64,
    wall_ms: f64,
    uplink: f64,
}

fn timed<T>(f: impl FnOnce() -> Result<T, ExperimentError>) -> Result<(T, f64), ExperimentError> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64() * 1e3))
}

fn subspace_error(truth: &SpectrumReference, v: &DenseMatrix, l: usize) -> Result<f64, ExperimentError> {
    let delta = relative_gap(&truth.values, l);
    Ok(if l == 1 {
        gapfree_error_top1(truth, &v.column(0), delta)?
    } else {
        gapfree_error_top_l(truth, v, l, delta)?
    })
}

fn run_pca_cell(spec: &ExperimentSpec, cell: &Cell, inst: &Instance) -> Result<Vec<Outcome>, ExperimentError> {
    let truth = inst.truth.as_ref().expect("pca instance carries truth");
    let blocks: Vec<DenseMatrix> = inst.shards.iter().map(|s| s.a.clone()).collect();
    let block_bytes = (spec.m * spec.d * 8) as f64;
    let mut out = Vec::new();
    let (oracle, ms) = timed(|| Ok(baselines::oracle_pca(&inst.data.a, cell.l)?))?;
    let oracle_err = subspace_error(truth, &oracle.u_hat, cell.l)?;
    let (dc, dc_ms) = timed(|| Ok(baselines::dc_pca(&blocks, cell.l)?))?;
    let dc_err = subspace_error(truth, &dc.u_hat, cell.l)?;
    for &t in &spec.t {
        let cfg = spec.solver_config(cell, t);
        let (res, ours_ms) = timed(|| {
            let mut cluster = Cluster::spawn(&inst.shards, Operator::Covariance, spec.transport_kind(cell.k))?;
            Ok(solver::top_l_subspace(&mut cluster, &cfg)?)
        })?;
        out.push(Outcome {
            method: Method::Ours,
            t: Some(t),
            metric: Metric::Gapfree,
            error: subspace_error(truth, &res.v, cell.l)?,
            wall_ms: ours_ms,
            uplink: res.ledger.max_uplink_payload_bytes() as f64,
        });
    }
    out.push(Outcome {
        method: Method::Dc,
        t: None,
        metric: Metric::Gapfree,
        error: dc_err,
        wall_ms: dc_ms,
        uplink: (cell.l * spec.d * 8) as f64,
    });
    out.push(Outcome {
        method: Method::Oracle,
        t: None,
        metric: Metric::Gapfree,
        error: oracle_err,
        wall_ms: ms,
        uplink: block_bytes,
    });
    Ok(out)
}

fn pcr_outcomes(
    method: Method,
    t: Option<usize>,
    inst: &Instance,
    beta_hat: &DenseVector,
    wall_ms: f64,
    uplink: f64,
) -> Result<[Outcome; 2], ExperimentError> {
    let beta = inst.beta.as_ref().expect("pcr instance carries beta");
    Ok([
        Outcome {
            method,
            t,
            metric: Metric::PcrPrediction,
            error: pcr_prediction_error(&inst.data.a, beta_hat, beta)?,
            wall_ms,
            uplink,
        },
        Outcome {
            method,
            t,
            metric: Metric::BetaL2,
            error: beta_hat.sub(beta).norm(),
            wall_ms,
            uplink,
        },
    ])
}

fn run_pcr_cell(spec: &ExperimentSpec, cell: &Cell, inst: &Instance) -> Result<Vec<Outcome>, ExperimentError> {
    let y = inst.data.y.as_ref().expect("pcr instance carries responses");
    let blocks: Vec<DenseMatrix> = inst.shards.iter().map(|s| s.a.clone()).collect();
    let mut out = Vec::new();
    for &t in &spec.t {
        let cfg = spec.solver_config(cell, t);
        let ((fit, res), ms) =
            timed(|| Ok(apps::distributed_pcr(&inst.shards, &cfg, spec.pcr_basis, spec.transport_kind(cell.k))?))?;
        // the regression adds one normal-equation reply of S² + S reals
        let reg_bytes = ((fit.s * fit.s + fit.s) * 8) as f64;
        let uplink = res.ledger.max_uplink_payload_bytes() as f64 + reg_bytes;
        out.extend(pcr_outcomes(Method::Ours, Some(t), inst, &fit.beta, ms, uplink)?);
    }
    let (dc, dc_ms) = timed(|| {
        let basis = baselines::dc_pca(&blocks, cell.l)?;
        Ok(pooled_pcr(&inst.data.a, y, &basis.u_hat)?)
    })?;
    let dc_up = ((cell.l * spec.d + cell.l * cell.l + cell.l) * 8) as f64;
    out.extend(pcr_outcomes(Method::Dc, None, inst, &dc.beta, dc_ms, dc_up)?);
    let (oracle, ms) = timed(|| {
        let basis = baselines::oracle_pca(&inst.data.a, cell.l)?;
        Ok(pooled_pcr(&inst.data.a, y, &basis.u_hat)?)
    })?;
    let oracle_up = (spec.m * (spec.d + 1) * 8) as f64;
    out.extend(pcr_outcomes(Method::Oracle, None, inst, &oracle.beta, ms, oracle_up)?);
    Ok(out)
}

fn run_sim_cell(spec: &ExperimentSpec, cell: &Cell, inst: &Instance) -> Result<Vec<Outcome>, ExperimentError> {
    let beta = inst.beta.as_ref().expect("sim instance carries beta");
    let y = inst.data.y.as_ref().expect("sim instance carries responses");
    let mut out = Vec::new();
    for &t in &spec.t {
        let cfg = spec.solver_config(cell, t);
        let (res, ms) = timed(|| {
            let mut cluster = apps::spawn_sim_cluster(&inst.shards, spec.transport_kind(cell.k))?;
            Ok(apps::sim_fit(&mut cluster, &cfg)?)
        })?;
        out.push(Outcome {
            method: Method::Ours,
            t: Some(t),
            metric: Metric::SignCorrectedL2,
            error: sign_corrected_l2(&res.top(), beta)?,
            wall_ms: ms,
            uplink: res.ledger.max_uplink_payload_bytes() as f64,
        });
    }
    let (dc, dc_ms) = timed(|| {
        let locals: Vec<DenseMatrix> = inst
            .shards
            .par_iter()
            .map(|s| stein_matrix(&s.a, s.y.as_ref().expect("sim shard carries responses")))
            .collect();
        Ok(baselines::dc_from_matrices(&locals, 1)?)
    })?;
    out.push(Outcome {
        method: Method::Dc,
        t: None,
        metric: Metric::SignCorrectedL2,
        error: sign_corrected_l2(&dc.u_hat.column(0), beta)?,
        wall_ms: dc_ms,
        uplink: (spec.d * 8) as f64,
    });
    let (oracle, ms): (BaselineResult, f64) =
        timed(|| Ok(baselines::oracle_from_matrix(&stein_matrix(&inst.data.a, y), 1)?))?;
    out.push(Outcome {
        method: Method::Oracle,
        t: None,
        metric: Metric::SignCorrectedL2,
        error: sign_corrected_l2(&oracle.u_hat.column(0), beta)?,
        wall_ms: ms,
        uplink: (spec.m * (spec.d + 1) * 8) as f64,
    });
    Ok(out)
}

fn run_cell(spec: &ExperimentSpec, cell: &Cell, rep: usize) -> Result<Vec<RunRecord>, ExperimentError> {
    let inst = instance(spec, cell, rep)?;
    let outcomes = match spec.kind {
        ExperimentKind::Pcr => run_pcr_cell(spec, cell, &inst)?,
        ExperimentKind::Sim => run_sim_cell(spec, cell, &inst)?,
        _ => run_pca_cell(spec, cell, &inst)?,
    };
    let record = |o: &Outcome, t: usize| RunRecord {
        kind: spec.kind,
        rep: Some(rep),
        k: cell.k,
        m: spec.m,
        d: spec.d,
        delta: cell.delta,
        l: cell.l,
        t,
        t_inner: cell.t_inner,
        skewness: spec.skewness,
        noise_var: matches!(spec.kind, ExperimentKind::Pcr | ExperimentKind::Sim).then_some(spec.noise_var),
        link: (spec.kind == ExperimentKind::Sim).then_some(spec.link),
        method: o.method,
        metric: o.metric,
        error: o.error,
        log10_error: log10_error(o.error),
        wall_ms: spec.record_timing.then_some(o.wall_ms),
        uplink_bytes: o.uplink,
    };
    // one block of rows per T; the non-iterative baselines repeat in each
    let mut rows = Vec::new();
    for &t in &spec.t {
        for method in Method::ALL {
            for o in outcomes.iter().filter(|o| o.method == method && o.t.is_none_or(|ot| ot == t)) {
                rows.push(record(o, t));
            }
        }
    }
    Ok(rows)
}

/// Runs every repetition and cell. Per-run rows come first in
/// `(repetition, cell, T, method)` order, followed by the mean rows.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunRecord>, ExperimentError> {
    spec.validate()?;
    let cells = spec.cells();
    let run_rep = |rep: usize| -> Result<Vec<RunRecord>, ExperimentError> {
        let mut rows = Vec::new();
        for cell in &cells {
            rows.extend(run_cell(spec, cell, rep).map_err(|e| ExperimentError::Cell {
                rep,
                cell: cell.to_string(),
                source: Box::new(e),
            })?);
        }
        Ok(rows)
    };
    let per_rep: Vec<Vec<RunRecord>> = match spec.transport {
        // loopback sockets spawn K threads per cluster; keep them sequential
        TransportChoice::Tcp => (0..spec.monte_carlo).map(run_rep).collect::<Result<_, _>>()?,
        TransportChoice::Memory => (0..spec.monte_carlo).into_par_iter().map(run_rep).collect::<Result<_, _>>()?,
    };
    let mut records: Vec<RunRecord> = per_rep.into_iter().flatten().collect();
    let means = mean_records(&records);
    records.extend(means);
    Ok(records)
}

/// Runs and writes the CSV to `spec.out` when set.
pub fn run_and_write(spec: &ExperimentSpec) -> Result<Vec<RunRecord>, ExperimentError> {
    let records = run_experiment(spec)?;
    if let Some(path) = &spec.out {
        write_csv(path, &records).map_err(|e| ExperimentError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    Ok(records)
}
