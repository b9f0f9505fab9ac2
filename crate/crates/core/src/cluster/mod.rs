//! Simulated master/worker cluster.
//!
//! The [`Cluster`] handle is the coordinator. It owns a [`Transport`] that
//! reaches the workers either in-process or over TCP, and a [`CommLedger`]
//! recording every message. All reductions run in ascending worker order so
//! results are bit-identical across transports and thread schedules.

mod ledger;
pub mod message;
mod transport;
mod worker;

use thiserror::Error;

use crate::datagen::Shard;
use crate::linalg::{DenseMatrix, DenseVector};

pub use ledger::{CommLedger, WorkerTraffic};
pub use message::{
    read_frame, write_frame, ControlKind, ErrorCode, Message, Operator, QueryKind, ScalarKind,
    VectorKind, FRAME_OVERHEAD,
};
pub use transport::{serve_connection, serve_forever, InMemory, Tcp, Transport};
pub use worker::WorkerState;

/// Environment variable holding comma-separated `host:port` worker endpoints.
pub const ENDPOINTS_ENV: &str = "DISTPCA_ENDPOINTS";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("cluster has no workers")]
    EmptyCluster,
    #[error("shard {worker} has no rows")]
    EmptyShard { worker: usize },
    #[error("worker {worker}: dimension {found}, expected {expected}")]
    DimensionMismatch {
        worker: usize,
        expected: usize,
        found: usize,
    },
    #[error("transport setup failed: {0}")]
    TransportSetupFailed(String),
    #[error("worker {worker} unreachable: {detail}")]
    WorkerUnreachable { worker: usize, detail: String },
    #[error("worker {worker} protocol error: {detail}")]
    Protocol { worker: usize, detail: String },
    #[error("vector norm {norm} is not 1")]
    NotUnitVector { norm: f64 },
    #[error("worker {worker}: shifted local matrix not positive definite (pivot {pivot:.3e} at {index})")]
    NotPositiveDefinite {
        worker: usize,
        index: usize,
        pivot: f64,
    },
    #[error("worker {worker} holds no responses")]
    MissingResponses { worker: usize },
    #[error("worker {worker} failed: {code:?}")]
    WorkerFailed { worker: usize, code: ErrorCode },
}

/// How the coordinator reaches its workers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransportKind {
    InMemory,
    /// Worker threads in this process behind real loopback sockets.
    TcpLoopback,
    /// Externally started workers (`distpca worker --listen ...`).
    Tcp(Vec<String>),
}

/// Parses `DISTPCA_ENDPOINTS`, if set and non-empty.
pub fn endpoints_from_env() -> Option<Vec<String>> {
    let raw = std::env::var(ENDPOINTS_ENV).ok()?;
    let eps: Vec<String> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect();
    (!eps.is_empty()).then_some(eps)
}

pub struct Cluster {
    transport: Box<dyn Transport>,
    sizes: Vec<usize>,
    d: usize,
    n: usize,
    operator: Operator,
    ledger: CommLedger,
    anchor: Option<DenseVector>,
    shift: Option<f64>,
}

impl std::fmt::Debug for Cluster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Cluster")
            .field("sizes", &self.sizes)
            .field("d", &self.d)
            .field("operator", &self.operator)
            .finish_non_exhaustive()
    }
}

/// Cluster of covariance workers from bare matrices.
pub fn spawn_cluster(shards: &[DenseMatrix], transport: TransportKind) -> Result<Cluster, ClusterError> {
    let shards: Vec<Shard> = shards.iter().cloned().map(Shard::new).collect();
    Cluster::spawn(&shards, Operator::Covariance, transport)
}

fn from_error_reply(worker: usize, code: ErrorCode, detail: &[f64]) -> ClusterError {
    match code {
        ErrorCode::NotPositiveDefinite => ClusterError::NotPositiveDefinite {
            worker,
            index: detail.first().copied().unwrap_or(0.0) as usize,
            pivot: detail.get(1).copied().unwrap_or(f64::NAN),
        },
        ErrorCode::MissingResponses => ClusterError::MissingResponses { worker },
        code => ClusterError::WorkerFailed { worker, code },
    }
}

fn unexpected(worker: usize, m: &Message) -> ClusterError {
    ClusterError::Protocol {
        worker,
        detail: format!("unexpected reply {m:?}"),
    }
}

impl Cluster {
    pub fn spawn(shards: &[Shard], operator: Operator, transport: TransportKind) -> Result<Self, ClusterError> {
        if shards.is_empty() {
            return Err(ClusterError::EmptyCluster);
        }
        let d = shards[0].a.cols();
        for (k, s) in shards.iter().enumerate() {
            if s.a.rows() == 0 {
                return Err(ClusterError::EmptyShard { worker: k });
            }
            if s.a.cols() != d {
                return Err(ClusterError::DimensionMismatch {
                    worker: k,
                    expected: d,
                    found: s.a.cols(),
                });
            }
            if operator == Operator::Stein && s.y.is_none() {
                return Err(ClusterError::MissingResponses { worker: k });
            }
        }
        let k = shards.len();
        let remote = transport != TransportKind::InMemory;
        let mut transport: Box<dyn Transport> = match transport {
            TransportKind::InMemory => Box::new(InMemory::new(
                shards
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let w = WorkerState::new(i as u32, s.a.clone(), operator);
                        match &s.y {
                            Some(y) => w.with_responses(y.clone()),
                            None => w,
                        }
                    })
                    .collect(),
            )),
            TransportKind::TcpLoopback => Box::new(Tcp::loopback(k)?),
            TransportKind::Tcp(eps) => {
                if eps.len() != k {
                    return Err(ClusterError::TransportSetupFailed(format!(
                        "{} endpoints for {k} shards",
                        eps.len()
                    )));
                }
                Box::new(Tcp::connect(&eps)?)
            }
        };
        if transport.len() != k {
            return Err(ClusterError::TransportSetupFailed("worker count mismatch".into()));
        }
        // remote workers receive their data over the wire; in-memory ones already hold it
        for (i, s) in shards.iter().enumerate().filter(|_| remote) {
            for m in transport::load_messages(i, &s.a, s.y.as_ref(), operator) {
                transport.send(i, &m)?;
            }
        }
        let mut c = Self {
            transport,
            sizes: shards.iter().map(|s| s.a.rows()).collect(),
            d,
            n: shards.iter().map(|s| s.a.rows()).sum(),
            operator,
            ledger: CommLedger::new(k),
            anchor: None,
            shift: None,
        };
        let shapes = c.worker_shapes()?;
        for (i, (&(m, dk), s)) in shapes.iter().zip(shards).enumerate() {
            if m != s.a.rows() || dk != d {
                return Err(ClusterError::Protocol {
                    worker: i,
                    detail: format!("worker reports ({m}, {dk})"),
                });
            }
        }
        c.ledger.reset();
        Ok(c)
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn operator(&self) -> Operator {
        self.operator
    }

    pub fn ledger(&self) -> &CommLedger {
        &self.ledger
    }

    pub fn reset_ledger(&mut self) {
        self.ledger.reset();
    }

    /// Current shift known to the workers, if any was broadcast.
    pub fn shift(&self) -> Option<f64> {
        self.shift
    }

    pub fn broadcast(&mut self, msg: &Message) -> Result<(), ClusterError> {
        for k in 0..self.k() {
            self.ledger.record_down(k, msg);
        }
        self.transport.broadcast(msg)
    }

    fn round(&mut self, targets: &[usize], msg: &Message) -> Result<Vec<Message>, ClusterError> {
        for &k in targets {
            self.ledger.record_down(k, msg);
        }
        self.ledger.rounds += 1;
        let replies = self.transport.round(targets, msg)?;
        for (r, &k) in replies.iter().zip(targets) {
            self.ledger.record_up(k, r);
            if let Message::Error { code, detail } = r {
                return Err(from_error_reply(k, *code, detail));
            }
        }
        Ok(replies)
    }

    fn all(&self) -> Vec<usize> {
        (0..self.k()).collect()
    }

    fn query_all(&mut self, kind: QueryKind, arg: u64, payload: Vec<f64>) -> Result<Vec<Message>, ClusterError> {
        let targets = self.all();
        self.round(&targets, &Message::Query { kind, arg, payload })
    }

    fn query_one(&mut self, k: usize, kind: QueryKind, arg: u64, payload: Vec<f64>) -> Result<Message, ClusterError> {
        Ok(self
            .round(&[k], &Message::Query { kind, arg, payload })?
            .pop()
            .expect("one reply"))
    }

    fn vector_payload(k: usize, m: Message) -> Result<(u64, Vec<f64>), ClusterError> {
        match m {
            Message::VectorReply { weight, payload, .. } => Ok((weight, payload)),
            other => Err(unexpected(k, &other)),
        }
    }

    fn check_dim(&self, v: &DenseVector) {
        assert_eq!(v.dim(), self.d, "vector dimension must equal d");
    }

    /// `(m_k, d)` as reported by each worker.
    pub fn worker_shapes(&mut self) -> Result<Vec<(usize, usize)>, ClusterError> {
        self.query_all(QueryKind::Describe, 0, vec![])?
            .into_iter()
            .enumerate()
            .map(|(k, r)| match r {
                Message::ScalarReply { weight, value, .. } => Ok((weight as usize, value as usize)),
                other => Err(unexpected(k, &other)),
            })
            .collect()
    }

    pub fn control(&mut self, kind: ControlKind, index: u64) -> Result<(), ClusterError> {
        self.broadcast(&Message::Control { kind, index })
    }

    /// Broadcasts the shift `λ̄` unless the workers already hold it.
    pub fn set_shift(&mut self, shift: f64) -> Result<(), ClusterError> {
        if self.shift.map(f64::to_bits) != Some(shift.to_bits()) {
            self.broadcast(&Message::BroadcastScalar {
                kind: ScalarKind::Shift,
                value: shift,
            })?;
            self.shift = Some(shift);
        }
        Ok(())
    }

    /// Distributes the outer iterate, which workers use as gradient anchor.
    pub fn broadcast_iterate(&mut self, w: &DenseVector) -> Result<(), ClusterError> {
        self.check_dim(w);
        self.broadcast(&Message::BroadcastVector {
            kind: VectorKind::Iterate,
            payload: w.clone(),
        })?;
        self.anchor = Some(w.clone());
        Ok(())
    }

    /// `Σ_k (m_k/n)(H_k·iterate − anchor)`, summed in worker order. The anchor
    /// is broadcast first when the workers do not already hold it.
    pub fn aggregate_gradients(&mut self, iterate: &DenseVector, anchor: &DenseVector) -> Result<DenseVector, ClusterError> {
        self.check_dim(iterate);
        if self.anchor.as_ref() != Some(anchor) {
            self.broadcast_iterate(anchor)?;
        }
        let n = self.n as f64;
        let mut g = DenseVector::zeros(self.d);
        for (k, r) in self
            .query_all(QueryKind::Gradient, 0, iterate.as_slice().to_vec())?
            .into_iter()
            .enumerate()
        {
            match r {
                Message::GradientReply { weight, payload, .. } if payload.dim() == self.d => {
                    g.axpy(weight as f64 / n, &payload)
                }
                other => return Err(unexpected(k, &other)),
            }
        }
        Ok(g)
    }

    /// `H_1⁻¹ g`, solved on worker 0 with its cached factorization.
    pub fn newton_step(&mut self, g: &DenseVector) -> Result<DenseVector, ClusterError> {
        self.check_dim(g);
        let r = self.query_one(0, QueryKind::NewtonStep, 0, g.as_slice().to_vec())?;
        let (_, x) = Self::vector_payload(0, r)?;
        Ok(DenseVector::from(x))
    }

    /// Top eigenpair of worker 0's local matrix.
    pub fn local_top_eigen(&mut self) -> Result<(f64, DenseVector), ClusterError> {
        let r = self.query_one(0, QueryKind::LocalTopEigen, 0, vec![])?;
        let (_, mut p) = Self::vector_payload(0, r)?;
        if p.len() != self.d + 1 {
            return Err(ClusterError::Protocol {
                worker: 0,
                detail: "eigenpair length".into(),
            });
        }
        let lambda = p.remove(0);
        Ok((lambda, DenseVector::from(p)))
    }

    /// Pooled quadratic form `wᵀ M w = Σ_k (m_k/n) wᵀ M_k w`.
    pub fn rayleigh(&mut self, w: &DenseVector) -> Result<f64, ClusterError> {
        self.check_dim(w);
        let n = self.n as f64;
        let mut total = 0.0;
        for (k, r) in self
            .query_all(QueryKind::Rayleigh, 0, w.as_slice().to_vec())?
            .into_iter()
            .enumerate()
        {
            match r {
                Message::ScalarReply { weight, value, .. } => total += weight as f64 / n * value,
                other => return Err(unexpected(k, &other)),
            }
        }
        Ok(total)
    }

    /// Weighted mean of the local sample means.
    pub fn global_mean(&mut self) -> Result<DenseVector, ClusterError> {
        let mut acc = DenseVector::zeros(self.d);
        for (k, r) in self.query_all(QueryKind::LocalMean, 0, vec![])?.into_iter().enumerate() {
            let (w, mean) = Self::vector_payload(k, r)?;
            acc.axpy(w as f64, &DenseVector::from(mean));
        }
        Ok(acc.scaled(1.0 / self.n as f64))
    }

    /// Subtracts the global mean from every row on every worker.
    pub fn center(&mut self) -> Result<DenseVector, ClusterError> {
        let mean = self.global_mean()?;
        self.broadcast(&Message::BroadcastVector {
            kind: VectorKind::Mean,
            payload: mean.clone(),
        })?;
        Ok(mean)
    }

    /// Every worker replaces `A_k ← A_k(I − vvᵀ)`.
    pub fn apply_deflation(&mut self, v: &DenseVector) -> Result<(), ClusterError> {
        self.check_dim(v);
        let norm = v.norm();
        if !((norm - 1.0).abs() <= 1e-8) {
            return Err(ClusterError::NotUnitVector { norm });
        }
        self.broadcast(&Message::BroadcastVector {
            kind: VectorKind::Deflation,
            payload: v.clone(),
        })
    }

    /// Summed normal equations `(Σ VᵀA_kᵀA_kV, Σ VᵀA_kᵀy_k)` for a `d × S` panel.
    pub fn normal_equations(&mut self, v: &DenseMatrix) -> Result<(DenseMatrix, DenseVector), ClusterError> {
        assert_eq!(v.rows(), self.d);
        let s = v.cols();
        let mut gram = DenseMatrix::zeros(s, s);
        let mut rhs = DenseVector::zeros(s);
        for (k, r) in self
            .query_all(QueryKind::NormalEquations, s as u64, v.as_slice().to_vec())?
            .into_iter()
            .enumerate()
        {
            let (_, p) = Self::vector_payload(k, r)?;
            if p.len() != s * s + s {
                return Err(unexpected(k, &Message::VectorReply { worker: k as u32, weight: 0, payload: p }));
            }
            gram.add_scaled(1.0, &DenseMatrix::from_col_major(s, s, p[..s * s].to_vec()).expect("finite"));
            rhs.axpy(1.0, &DenseVector::from(p[s * s..].to_vec()));
        }
        Ok((gram, rhs))
    }

    /// Local matrices `M_k` of every worker. Costs `d²` reals of uplink per
    /// worker; used only by diagnostics such as the κ probe.
    pub fn local_matrices(&mut self) -> Result<Vec<DenseMatrix>, ClusterError> {
        let d = self.d;
        self.query_all(QueryKind::LocalMatrix, 0, vec![])?
            .into_iter()
            .enumerate()
            .map(|(k, r)| {
                let (_, p) = Self::vector_payload(k, r)?;
                DenseMatrix::from_col_major(d, d, p).map_err(|e| ClusterError::Protocol {
                    worker: k,
                    detail: e.to_string(),
                })
            })
            .collect()
    }

    /// Worker `k`'s current data matrix. Diagnostic; counted as uplink.
    pub fn fetch_shard(&mut self, k: usize) -> Result<DenseMatrix, ClusterError> {
        let r = self.query_one(k, QueryKind::FetchShard, 0, vec![])?;
        let (_, data) = Self::vector_payload(k, r)?;
        let rows = self.sizes[k];
        DenseMatrix::from_col_major(rows, self.d, data).map_err(|e| ClusterError::Protocol {
            worker: k,
            detail: e.to_string(),
        })
    }

    /// Last vector broadcast seen by worker `k`.
    pub fn last_broadcast(&mut self, k: usize) -> Result<Option<DenseVector>, ClusterError> {
        let r = self.query_one(k, QueryKind::LastBroadcast, 0, vec![])?;
        let (_, p) = Self::vector_payload(k, r)?;
        Ok((!p.is_empty()).then(|| DenseVector::from(p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols).map(|_| StandardNormal.sample(&mut rng)).collect();
        DenseMatrix::from_col_major(rows, cols, data).unwrap()
    }

    #[test]
    fn rejects_empty() {
        assert!(matches!(spawn_cluster(&[], TransportKind::InMemory), Err(ClusterError::EmptyCluster)));
        let shards = [random(2, 3, 0), DenseMatrix::zeros(0, 3)];
        assert!(matches!(
            spawn_cluster(&shards, TransportKind::InMemory),
            Err(ClusterError::EmptyShard { worker: 1 })
        ));
        let shards = [random(2, 3, 0), random(2, 4, 0)];
        assert!(matches!(
            spawn_cluster(&shards, TransportKind::InMemory),
            Err(ClusterError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn shapes_and_zeroed_ledger() {
        let shards = [random(2, 5, 1), random(3, 5, 2), random(4, 5, 3)];
        let mut c = spawn_cluster(&shards, TransportKind::InMemory).unwrap();
        assert_eq!(c.ledger(), &CommLedger::new(3));
        assert_eq!(c.worker_shapes().unwrap(), vec![(2, 5), (3, 5), (4, 5)]);
        let one = spawn_cluster(&shards[..1], TransportKind::InMemory).unwrap();
        assert_eq!(one.k(), 1);
    }

    #[test]
    fn broadcast_accounting_and_order() {
        let shards = [random(3, 50, 1), random(3, 50, 2)];
        let mut c = spawn_cluster(&shards, TransportKind::InMemory).unwrap();
        let v1 = DenseVector::from(random(50, 1, 7).into_vec());
        let v2 = DenseVector::from(random(50, 1, 8).into_vec());
        c.broadcast_iterate(&v1).unwrap();
        for t in &c.ledger().workers {
            assert_eq!(t.downlink_payload_bytes, 400);
        }
        c.broadcast_iterate(&v2).unwrap();
        for k in 0..2 {
            assert_eq!(c.last_broadcast(k).unwrap().unwrap(), v2);
        }
    }

    #[test]
    fn gradient_single_worker_exact() {
        let a = random(6, 4, 3);
        let mut c = spawn_cluster(&[a.clone()], TransportKind::InMemory).unwrap();
        c.set_shift(5.0).unwrap();
        let w = DenseVector::from(vec![0.1, -0.2, 0.3, 0.4]);
        let anchor = DenseVector::from(vec![0.5, 0.5, 0.5, 0.5]);
        let g = c.aggregate_gradients(&w, &anchor).unwrap();
        let mut oracle = w.scaled(5.0);
        oracle.axpy(-1.0 / 6.0, &a.t_matvec(a.matvec(w.as_slice()).as_slice()));
        oracle.axpy(-1.0, &anchor);
        assert_eq!(g, oracle);
    }

    #[test]
    fn gradient_matches_pooled() {
        let shards: Vec<_> = (0..3).map(|k| random(5, 4, 10 + k)).collect();
        let pooled = DenseMatrix::vstack(&shards.iter().collect::<Vec<_>>());
        let mut c = spawn_cluster(&shards, TransportKind::InMemory).unwrap();
        c.set_shift(3.0).unwrap();
        let w = DenseVector::from(vec![0.3, 0.1, -0.7, 0.2]);
        let anchor = DenseVector::from(vec![1.0, 0.0, 0.0, 0.0]);
        let g = c.aggregate_gradients(&w, &anchor).unwrap();
        let mut oracle = w.scaled(3.0);
        oracle.axpy(-1.0 / 15.0, &pooled.t_matvec(pooled.matvec(w.as_slice()).as_slice()));
        oracle.axpy(-1.0, &anchor);
        assert!(g.max_abs_diff(&oracle) < 1e-12);

        // identical shards: mean equals each g_k
        let same = vec![shards[0].clone(), shards[0].clone()];
        let mut c2 = spawn_cluster(&same, TransportKind::InMemory).unwrap();
        let mut c1 = spawn_cluster(&same[..1], TransportKind::InMemory).unwrap();
        for c in [&mut c1, &mut c2] {
            c.set_shift(3.0).unwrap();
        }
        let g1 = c1.aggregate_gradients(&w, &anchor).unwrap();
        let g2 = c2.aggregate_gradients(&w, &anchor).unwrap();
        assert!(g1.max_abs_diff(&g2) < 1e-15);
    }

    #[test]
    fn anchor_broadcast_only_on_change() {
        let mut c = spawn_cluster(&[random(4, 3, 1)], TransportKind::InMemory).unwrap();
        c.set_shift(4.0).unwrap();
        let w = DenseVector::from(vec![1.0, 0.0, 0.0]);
        c.aggregate_gradients(&w, &w).unwrap();
        c.aggregate_gradients(&w, &w).unwrap();
        let t = c.ledger().workers[0];
        // shift + one anchor + two iterates
        assert_eq!(t.downlink_payload_bytes, 8 + 24 + 48);
        assert_eq!(t.uplink_gradient_bytes, 48);
    }

    #[test]
    fn deflation_and_rayleigh() {
        let shards: Vec<_> = (0..2).map(|k| random(6, 4, 20 + k)).collect();
        let pooled = DenseMatrix::vstack(&shards.iter().collect::<Vec<_>>());
        let sigma = pooled.gram().scaled(1.0 / 12.0);
        let mut c = spawn_cluster(&shards, TransportKind::InMemory).unwrap();
        let w = DenseVector::from(vec![0.5, 0.5, 0.5, 0.5]);
        let direct = w.dot(&sigma.matvec(w.as_slice()));
        assert!((c.rayleigh(&w).unwrap() - direct).abs() < 1e-12);

        assert!(matches!(
            c.apply_deflation(&DenseVector::from(vec![1.0, 1.0, 0.0, 0.0])),
            Err(ClusterError::NotUnitVector { .. })
        ));
        let v = DenseVector::from(vec![0.0, 0.6, 0.8, 0.0]);
        c.apply_deflation(&v).unwrap();
        let mut p = DenseMatrix::identity(4);
        p.add_scaled(-1.0, &DenseMatrix::from_col_major(4, 1, v.as_slice().to_vec()).unwrap().outer_gram());
        let oracle = p.matmul(&sigma).matmul(&p);
        let parts: Vec<_> = (0..2).map(|k| c.fetch_shard(k).unwrap()).collect();
        for a in &parts {
            assert!(a.matvec(v.as_slice()).norm() < 1e-10);
        }
        let deflated = DenseMatrix::vstack(&parts.iter().collect::<Vec<_>>()).gram().scaled(1.0 / 12.0);
        assert!(deflated.max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn centering() {
        let a = DenseMatrix::from_rows(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let b = DenseMatrix::from_rows(&[&[3.0, 0.0], &[3.0, 0.0]]);
        let mut c = spawn_cluster(&[a, b], TransportKind::InMemory).unwrap();
        assert_eq!(c.center().unwrap().as_slice(), &[2.0, 0.0]);
        assert!(c.global_mean().unwrap().norm() < 1e-12);

        let a = DenseMatrix::from_rows(&[&[4.0]]);
        let b = DenseMatrix::from_rows(&[&[0.0], &[0.0], &[0.0]]);
        let mut c = spawn_cluster(&[a, b], TransportKind::InMemory).unwrap();
        assert_eq!(c.global_mean().unwrap().as_slice(), &[1.0]);
    }

    #[test]
    fn newton_error_propagates() {
        let mut c = spawn_cluster(&[random(5, 3, 1)], TransportKind::InMemory).unwrap();
        c.set_shift(-1.0).unwrap();
        assert!(matches!(
            c.newton_step(&DenseVector::from(vec![1.0, 0.0, 0.0])),
            Err(ClusterError::NotPositiveDefinite { worker: 0, .. })
        ));
    }
}
