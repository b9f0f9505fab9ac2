use crate::linalg::{
    dot, spd_factor, sym_eigendecompose, DenseMatrix, DenseVector, LinalgError, SpdFactor,
};

use super::message::{ErrorCode, Message, Operator, QueryKind, ScalarKind, VectorKind};

/// State held by one machine: its shard, the current shift, the deflation
/// panel and (on worker 0) the cached factorization of `H_1`.
#[derive(Debug)]
pub struct WorkerState {
    index: u32,
    a: DenseMatrix,
    y: Option<DenseVector>,
    operator: Operator,
    shift: f64,
    panel: Vec<DenseVector>,
    anchor: Option<DenseVector>,
    last_broadcast: Option<DenseVector>,
    factor: Option<SpdFactor>,
    /// Error raised while handling a broadcast, reported on the next reply.
    pending: Option<Message>,
}

fn error(code: ErrorCode, detail: Vec<f64>) -> Message {
    Message::Error { code, detail }
}

fn bad_request() -> Message {
    error(ErrorCode::BadRequest, vec![])
}

fn from_linalg(e: LinalgError) -> Message {
    match e {
        LinalgError::NotPositiveDefinite { index, pivot } => {
            error(ErrorCode::NotPositiveDefinite, vec![index as f64, pivot])
        }
        _ => error(ErrorCode::Numerical, vec![]),
    }
}

impl WorkerState {
    pub fn new(index: u32, a: DenseMatrix, operator: Operator) -> Self {
        Self {
            index,
            a,
            y: None,
            operator,
            shift: 0.0,
            panel: Vec::new(),
            anchor: None,
            last_broadcast: None,
            factor: None,
            pending: None,
        }
    }

    pub fn with_responses(mut self, y: DenseVector) -> Self {
        self.y = Some(y);
        self
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn d(&self) -> usize {
        self.a.cols()
    }

    pub fn data(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn panel(&self) -> &[DenseVector] {
        &self.panel
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    fn m_f(&self) -> f64 {
        self.a.rows() as f64
    }

    fn mean_response(&self) -> f64 {
        self.y
            .as_ref()
            .map(|y| y.as_slice().iter().sum::<f64>() / self.m_f())
            .unwrap_or(0.0)
    }

    /// `(I − VVᵀ) w` over the received deflation vectors.
    fn project(&self, w: &[f64]) -> Vec<f64> {
        let mut out = w.to_vec();
        for v in &self.panel {
            let c = dot(v.as_slice(), &out);
            for (o, vi) in out.iter_mut().zip(v.as_slice()) {
                *o -= c * vi;
            }
        }
        out
    }

    /// `M_k w`, matrix-free.
    pub fn apply_local(&self, w: &[f64]) -> Result<DenseVector, Message> {
        let aw = self.a.matvec(w);
        match self.operator {
            Operator::Covariance => Ok(self.a.t_matvec(aw.as_slice()).scaled(1.0 / self.m_f())),
            Operator::Stein => {
                let y = self.y.as_ref().ok_or_else(|| error(ErrorCode::MissingResponses, vec![]))?;
                let weighted: Vec<f64> = aw.as_slice().iter().zip(y.as_slice()).map(|(a, b)| a * b).collect();
                let mut out = self.a.t_matvec(&weighted).scaled(1.0 / self.m_f());
                // the data is already deflated; the identity term is projected explicitly
                let pw = DenseVector::from(self.project(w));
                out.axpy(-self.mean_response(), &pw);
                Ok(out)
            }
        }
    }

    /// `H_k w = λ̄ w − M_k w`.
    pub fn apply_h(&self, w: &[f64]) -> Result<DenseVector, Message> {
        let mut out = DenseVector::from(w.to_vec()).scaled(self.shift);
        out.axpy(-1.0, &self.apply_local(w)?);
        Ok(out)
    }

    /// Dense local matrix `M_k`, exactly symmetric.
    pub fn local_matrix(&self) -> Result<DenseMatrix, Message> {
        match self.operator {
            Operator::Covariance => Ok(self.a.gram().scaled(1.0 / self.m_f())),
            Operator::Stein => {
                let y = self.y.as_ref().ok_or_else(|| error(ErrorCode::MissingResponses, vec![]))?;
                let mut m = self.a.weighted_gram(y.as_slice()).scaled(1.0 / self.m_f());
                let d = self.d();
                let mut p = DenseMatrix::identity(d);
                for v in &self.panel {
                    let vm = DenseMatrix::from_col_major(d, 1, v.as_slice().to_vec()).map_err(from_linalg)?;
                    p.add_scaled(-1.0, &vm.outer_gram());
                }
                m.add_scaled(-self.mean_response(), &p.symmetrized());
                Ok(m)
            }
        }
    }

    fn ensure_factor(&mut self) -> Result<&SpdFactor, Message> {
        if self.factor.is_none() {
            let mut h = self.local_matrix()?.scaled(-1.0);
            for i in 0..self.d() {
                h[(i, i)] += self.shift;
            }
            self.factor = Some(spd_factor(&h).map_err(from_linalg)?);
        }
        Ok(self.factor.as_ref().unwrap())
    }

    fn check_dim(&self, len: usize) -> Result<(), Message> {
        if len == self.d() {
            Ok(())
        } else {
            Err(bad_request())
        }
    }

    fn on_broadcast(&mut self, kind: VectorKind, v: &DenseVector) -> Result<(), Message> {
        self.check_dim(v.dim())?;
        match kind {
            VectorKind::Iterate => self.anchor = Some(v.clone()),
            VectorKind::Deflation => {
                self.a.project_out_right(v.as_slice());
                self.panel.push(v.clone());
                self.factor = None;
            }
            VectorKind::Mean => {
                for j in 0..self.d() {
                    let mj = v[j];
                    self.a.col_mut(j).iter_mut().for_each(|x| *x -= mj);
                }
                self.factor = None;
            }
        }
        self.last_broadcast = Some(v.clone());
        Ok(())
    }

    fn vector_reply(&self, payload: Vec<f64>) -> Message {
        Message::VectorReply {
            worker: self.index,
            weight: self.m() as u64,
            payload,
        }
    }

    fn on_query(&mut self, kind: QueryKind, arg: u64, payload: &[f64]) -> Result<Message, Message> {
        let weight = self.m() as u64;
        match kind {
            QueryKind::Gradient => {
                self.check_dim(payload.len())?;
                let anchor = self.anchor.as_ref().ok_or_else(bad_request)?;
                let mut g = self.apply_h(payload)?;
                g.axpy(-1.0, anchor);
                Ok(Message::GradientReply {
                    worker: self.index,
                    weight,
                    payload: g,
                })
            }
            QueryKind::Rayleigh => {
                self.check_dim(payload.len())?;
                let value = match self.operator {
                    Operator::Covariance => {
                        let aw = self.a.matvec(payload);
                        aw.dot(&aw) / self.m_f()
                    }
                    Operator::Stein => dot(payload, self.apply_local(payload)?.as_slice()),
                };
                Ok(Message::ScalarReply {
                    worker: self.index,
                    weight,
                    value,
                })
            }
            QueryKind::LocalTopEigen => {
                let e = sym_eigendecompose(&self.local_matrix()?).map_err(from_linalg)?;
                let mut out = vec![e.values[0]];
                out.extend_from_slice(e.vectors.col(0));
                Ok(self.vector_reply(out))
            }
            QueryKind::LocalMean => {
                let m = self.m_f();
                let mean = (0..self.d()).map(|j| self.a.col(j).iter().sum::<f64>() / m).collect();
                Ok(self.vector_reply(mean))
            }
            QueryKind::NormalEquations => {
                let s = arg as usize;
                if s == 0 || payload.len() != self.d() * s {
                    return Err(bad_request());
                }
                let y = self.y.as_ref().ok_or_else(|| error(ErrorCode::MissingResponses, vec![]))?;
                let v = DenseMatrix::from_col_major(self.d(), s, payload.to_vec()).map_err(from_linalg)?;
                let at = self.a.matmul(&v);
                let mut out = at.gram().into_vec();
                out.extend_from_slice(at.t_matvec(y.as_slice()).as_slice());
                Ok(self.vector_reply(out))
            }
            QueryKind::NewtonStep => {
                self.check_dim(payload.len())?;
                let f = self.ensure_factor()?;
                let x = f.solve(&DenseVector::from(payload.to_vec())).map_err(from_linalg)?;
                Ok(self.vector_reply(x.into_vec()))
            }
            QueryKind::Describe => Ok(Message::ScalarReply {
                worker: self.index,
                weight,
                value: self.d() as f64,
            }),
            QueryKind::LastBroadcast => Ok(self.vector_reply(
                self.last_broadcast
                    .as_ref()
                    .map(|v| v.as_slice().to_vec())
                    .unwrap_or_default(),
            )),
            QueryKind::FetchShard => Ok(self.vector_reply(self.a.as_slice().to_vec())),
            QueryKind::LocalMatrix => Ok(self.vector_reply(self.local_matrix()?.into_vec())),
        }
    }

    /// Processes one message. Broadcasts produce no reply; queries produce
    /// exactly one. A broadcast that fails is reported on the next reply.
    pub fn handle(&mut self, msg: &Message) -> Option<Message> {
        match msg {
            Message::BroadcastVector { kind, payload } => {
                if let Err(e) = self.on_broadcast(*kind, payload) {
                    self.pending.get_or_insert(e);
                }
                None
            }
            Message::BroadcastScalar {
                kind: ScalarKind::Shift,
                value,
            } => {
                if *value != self.shift {
                    self.shift = *value;
                    self.factor = None;
                }
                None
            }
            Message::Control { .. } => None,
            Message::LoadResponses { payload } => {
                if payload.len() == self.m() {
                    self.y = Some(DenseVector::from(payload.clone()));
                } else {
                    self.pending.get_or_insert(bad_request());
                }
                None
            }
            Message::Query { kind, arg, payload } => {
                let reply = self.on_query(*kind, *arg, payload).unwrap_or_else(|e| e);
                Some(self.pending.take().unwrap_or(reply))
            }
            _ => Some(self.pending.take().unwrap_or_else(bad_request)),
        }
    }
}
