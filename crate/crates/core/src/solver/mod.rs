//! Distributed shift-and-invert eigensolver.
//!
//! [`top_eigenvector`] runs outer shift-and-invert iterations whose linear
//! systems `(λ̄I − Σ̂) w = w^{(t)}` are solved approximately: every worker
//! returns its gradient `H_k w − w^{(t)}` and the coordinator takes Newton
//! steps preconditioned by worker 0's factorized `H_1`. [`top_l_subspace`]
//! deflates and repeats; [`enlarged_subspace`] keeps deflating until the
//! Rayleigh quotients fall below `(1−δ)` times the `L`-th one.

use thiserror::Error;

use crate::cluster::{Cluster, ClusterError, CommLedger, ControlKind};
use crate::linalg::{dot, sym_eigendecompose, sym_spectral_norm, DenseMatrix, DenseVector, LinalgError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("outer iterate vanished (norm {norm:.3e}) at eigenvector {l}, iteration {t}")]
    ZeroIterate { l: usize, t: usize, norm: f64 },
    #[error("eigenvector {l} collapsed after projection (norm {norm:.3e})")]
    DeflationCollapse { l: usize, norm: f64 },
}

/// How the regularization `η` (shift offset) is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EtaRule {
    /// `η = c₀ √(d/m₁)`.
    Practical { c0: f64 },
    /// `η = c₀ λ₁(Σ̂₁) √(d/m₁)`: the practical rule in units of the local
    /// top eigenvalue, so it is invariant to rescaling the data.
    Scaled { c0: f64 },
    /// Fixed value.
    Fixed(f64),
    /// `η = √(κ δ λ̂₁) / 3` with `κ = ‖Σ̂ − Σ̂₁‖₂` measured by one extra
    /// pooled round.
    Theoretical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Outer iterations `T`.
    pub outer: usize,
    /// Inner iterations `T'`.
    pub inner: usize,
    pub eta: EtaRule,
    /// Relative gap parameter used by the enlarged subspace and the
    /// theoretical `η`.
    pub delta: f64,
    /// Requested subspace dimension.
    pub l: usize,
    /// Return `V_S` instead of `V_L`.
    pub enlarge: bool,
    /// Measure `κ` and warn when `η < κ/2`.
    pub probe_kappa: bool,
    /// Keep every outer iterate in the result.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            outer: 30,
            inner: 5,
            eta: EtaRule::Practical { c0: 1.0 },
            delta: 0.5,
            l: 1,
            enlarge: false,
            probe_kappa: false,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if self.outer == 0 || self.inner == 0 {
            return bad(format!("need T >= 1 and T' >= 1, got {} and {}", self.outer, self.inner));
        }
        match self.eta {
            EtaRule::Practical { c0 } | EtaRule::Scaled { c0 } if !(c0 > 0.0 && c0.is_finite()) => {
                return bad(format!("c0 must be > 0, got {c0}"))
            }
            EtaRule::Fixed(eta) if !(eta > 0.0 && eta.is_finite()) => return bad(format!("eta must be > 0, got {eta}")),
            _ => {}
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0,1), got {}", self.delta));
        }
        if self.l == 0 {
            return bad("L must be >= 1".into());
        }
        Ok(())
    }
}

/// Initial shift, start vector and regularization for one eigenvector.
#[derive(Clone, Debug, PartialEq)]
pub struct InitEstimate {
    pub shift: f64,
    pub w0: DenseVector,
    pub eta: f64,
    /// `λ₁` of worker 0's local matrix.
    pub local_top: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    /// Eigenvector index, starting at 1.
    pub l: usize,
    /// Outer iteration; 0 is the start vector.
    pub t: usize,
    pub iterate: DenseVector,
}

#[derive(Clone, Debug)]
pub struct SolverResult {
    /// `d × S` with orthonormal columns.
    pub v: DenseMatrix,
    /// `v_lᵀ Σ̂ v_l` per column (pooled over the deflated data).
    pub rayleigh: Vec<f64>,
    /// Number of columns returned.
    pub s: usize,
    /// Enlargement ran out of dimensions before the stopping rule fired.
    pub saturated: bool,
    pub shifts: Vec<f64>,
    pub eta: f64,
    pub kappa: Option<f64>,
    pub trace: Vec<TraceRecord>,
    pub ledger: CommLedger,
}

impl SolverResult {
    pub fn top(&self) -> DenseVector {
        self.v.column(0)
    }
}

/// Pooled `(κ, λ̂₁)` with `κ = ‖Σ̂ − Σ̂₁‖₂` from the workers' local matrices.
pub fn probe_kappa(cluster: &mut Cluster) -> Result<(f64, f64), SolverError> {
    let locals = cluster.local_matrices()?;
    let n = cluster.n() as f64;
    let d = cluster.d();
    let mut pooled = DenseMatrix::zeros(d, d);
    for (m, &size) in locals.iter().zip(cluster.sizes()) {
        pooled.add_scaled(size as f64 / n, m);
    }
    let pooled = pooled.symmetrized();
    let kappa = sym_spectral_norm(&pooled.sub(&locals[0]).symmetrized())?;
    let lambda1 = sym_eigendecompose(&pooled)?.values[0];
    Ok((kappa, lambda1))
}

struct ResolvedEta {
    eta: f64,
    kappa: Option<f64>,
    /// Worker 0's top eigenpair when the rule needed it; reused by the
    /// first initialization.
    local: Option<(f64, DenseVector)>,
}

fn resolve_eta(cluster: &mut Cluster, cfg: &SolverConfig) -> Result<ResolvedEta, SolverError> {
    let m1 = cluster.sizes()[0] as f64;
    let d = cluster.d() as f64;
    let kappa = if cfg.probe_kappa || cfg.eta == EtaRule::Theoretical {
        Some(probe_kappa(cluster)?)
    } else {
        None
    };
    let mut local = None;
    let eta = match cfg.eta {
        EtaRule::Practical { c0 } => c0 * (d / m1).sqrt(),
        EtaRule::Scaled { c0 } => {
            let (top, w0) = cluster.local_top_eigen()?;
            local = Some((top, w0));
            c0 * top.max(f64::MIN_POSITIVE) * (d / m1).sqrt()
        }
        EtaRule::Fixed(eta) => eta,
        EtaRule::Theoretical => {
            let (k, l1) = kappa.unwrap();
            (k * cfg.delta * l1).sqrt() / 3.0
        }
    };
    if let Some((k, _)) = kappa {
        if eta < k / 2.0 {
            log::warn!("eta = {eta:.4e} is below kappa/2 = {:.4e}; the inner solve may not contract", k / 2.0);
        }
    }
    Ok(ResolvedEta {
        eta,
        kappa: kappa.map(|k| k.0),
        local,
    })
}

/// Worker 0 eigendecomposes its local matrix; `λ̄ = λ₁(Σ̂₁) + 3η/2` and the
/// start vector is the local top eigenvector.
pub fn init_estimates(cluster: &mut Cluster, eta: f64) -> Result<InitEstimate, SolverError> {
    let (local_top, w0) = cluster.local_top_eigen()?;
    Ok(init_from(local_top, w0, eta))
}

fn init_from(local_top: f64, w0: DenseVector, eta: f64) -> InitEstimate {
    InitEstimate {
        shift: local_top + 1.5 * eta,
        w0,
        eta,
        local_top,
    }
}

/// `T'` approximate Newton steps `w ← w − H_1⁻¹ g(w)` towards `H⁻¹ anchor`,
/// returning every inner iterate including the start.
pub fn inner_iterates(
    cluster: &mut Cluster,
    anchor: &DenseVector,
    start: &DenseVector,
    inner: usize,
) -> Result<Vec<DenseVector>, SolverError> {
    let mut out = Vec::with_capacity(inner + 1);
    out.push(start.clone());
    let mut w = start.clone();
    for _ in 0..inner {
        let g = cluster.aggregate_gradients(&w, anchor)?;
        let step = cluster.newton_step(&g)?;
        w.axpy(-1.0, &step);
        out.push(w.clone());
    }
    Ok(out)
}

pub fn inner_solve(
    cluster: &mut Cluster,
    anchor: &DenseVector,
    start: &DenseVector,
    inner: usize,
) -> Result<DenseVector, SolverError> {
    let mut w = start.clone();
    for _ in 0..inner {
        let g = cluster.aggregate_gradients(&w, anchor)?;
        let step = cluster.newton_step(&g)?;
        w.axpy(-1.0, &step);
    }
    Ok(w)
}

/// Outer loop for eigenvector `l` given its initial estimates.
fn power_loop(
    cluster: &mut Cluster,
    cfg: &SolverConfig,
    init: &InitEstimate,
    l: usize,
    trace: &mut Vec<TraceRecord>,
) -> Result<DenseVector, SolverError> {
    cluster.set_shift(init.shift)?;
    let mut w = init.w0.clone();
    if cfg.record_trace {
        trace.push(TraceRecord { l, t: 0, iterate: w.clone() });
    }
    for t in 0..cfg.outer {
        cluster.broadcast_iterate(&w)?;
        let next = inner_solve(cluster, &w, &w, cfg.inner)?;
        let norm = next.norm();
        if !(norm >= 1e-14) {
            return Err(SolverError::ZeroIterate { l, t: t + 1, norm });
        }
        w = next.scaled(1.0 / norm);
        if cfg.record_trace {
            trace.push(TraceRecord { l, t: t + 1, iterate: w.clone() });
        }
    }
    Ok(w)
}

/// Top eigenvector of the pooled matrix. Only `outer`, `inner`, `eta` and
/// the diagnostics flags of `cfg` are used.
pub fn top_eigenvector(cluster: &mut Cluster, cfg: &SolverConfig) -> Result<SolverResult, SolverError> {
    let cfg = SolverConfig {
        l: 1,
        enlarge: false,
        ..cfg.clone()
    };
    cfg.validate()?;
    let ResolvedEta { eta, kappa, local } = resolve_eta(cluster, &cfg)?;
    let init = match local {
        Some((top, w0)) => init_from(top, w0, eta),
        None => init_estimates(cluster, eta)?,
    };
    let mut trace = Vec::new();
    let w = power_loop(cluster, &cfg, &init, 1, &mut trace)?;
    let rayleigh = cluster.rayleigh(&w)?;
    Ok(SolverResult {
        v: DenseMatrix::from_columns(cluster.d(), &[w]),
        rayleigh: vec![rayleigh],
        s: 1,
        saturated: false,
        shifts: vec![init.shift],
        eta,
        kappa,
        trace,
        ledger: cluster.ledger().clone(),
    })
}

struct Deflation {
    vectors: Vec<DenseVector>,
    rayleigh: Vec<f64>,
    shifts: Vec<f64>,
    trace: Vec<TraceRecord>,
}

impl Deflation {
    /// Computes, projects, measures and deflates eigenvector `l`.
    fn next(
        &mut self,
        cluster: &mut Cluster,
        cfg: &SolverConfig,
        eta: f64,
        l: usize,
        local: Option<(f64, DenseVector)>,
    ) -> Result<(), SolverError> {
        cluster.control(ControlKind::BeginEigenvector, l as u64)?;
        let init = match local {
            Some((top, w0)) => init_from(top, w0, eta),
            None => init_estimates(cluster, eta)?,
        };
        let w = power_loop(cluster, cfg, &init, l, &mut self.trace)?;
        let mut v = w.clone();
        for u in &self.vectors {
            let c = dot(u.as_slice(), v.as_slice());
            v.axpy(-c, u);
        }
        let norm = v.norm();
        if !(norm >= 1e-10) {
            return Err(SolverError::DeflationCollapse { l, norm });
        }
        let v = v.scaled(1.0 / norm);
        self.rayleigh.push(cluster.rayleigh(&v)?);
        cluster.apply_deflation(&v)?;
        cluster.control(ControlKind::End, l as u64)?;
        self.vectors.push(v);
        self.shifts.push(init.shift);
        Ok(())
    }
}

fn deflation_run(cluster: &mut Cluster, cfg: &SolverConfig, enlarge: bool) -> Result<SolverResult, SolverError> {
    cfg.validate()?;
    let d = cluster.d();
    if cfg.l > d {
        return Err(SolverError::InvalidConfig(format!("L = {} exceeds d = {d}", cfg.l)));
    }
    let ResolvedEta { eta, kappa, mut local } = resolve_eta(cluster, cfg)?;
    let mut run = Deflation {
        vectors: Vec::new(),
        rayleigh: Vec::new(),
        shifts: Vec::new(),
        trace: Vec::new(),
    };
    for l in 1..=cfg.l {
        run.next(cluster, cfg, eta, l, local.take())?;
    }
    let mut s = cfg.l;
    let mut saturated = false;
    if enlarge {
        let threshold = (1.0 - cfg.delta) * run.rayleigh[cfg.l - 1];
        loop {
            if s == d {
                saturated = true;
                break;
            }
            run.next(cluster, cfg, eta, s + 1, None)?;
            if run.rayleigh[s] <= threshold {
                run.vectors.pop();
                run.rayleigh.pop();
                run.shifts.pop();
                break;
            }
            s += 1;
        }
    }
    Ok(SolverResult {
        v: DenseMatrix::from_columns(d, &run.vectors),
        rayleigh: run.rayleigh,
        s,
        saturated,
        shifts: run.shifts,
        eta,
        kappa,
        trace: run.trace,
        ledger: cluster.ledger().clone(),
    })
}

/// Top-`L` subspace by repeated top-eigenvector runs and deflation.
pub fn top_l_subspace(cluster: &mut Cluster, cfg: &SolverConfig) -> Result<SolverResult, SolverError> {
    deflation_run(cluster, cfg, false)
}

/// Enlarged subspace `V_S`: deflation continues past `L` until the first
/// Rayleigh quotient `≤ (1−δ)` times the `L`-th. `S = d` with `saturated`
/// set when the rule never fires.
pub fn enlarged_subspace(cluster: &mut Cluster, cfg: &SolverConfig) -> Result<SolverResult, SolverError> {
    deflation_run(cluster, cfg, true)
}

/// Dispatches on `cfg.enlarge`.
pub fn solve(cluster: &mut Cluster, cfg: &SolverConfig) -> Result<SolverResult, SolverError> {
    deflation_run(cluster, cfg, cfg.enlarge)
}
