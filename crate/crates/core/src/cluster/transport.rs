use std::io::{BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::thread::JoinHandle;

use rayon::prelude::*;

use super::message::{read_frame, write_frame, ErrorCode, Message};
use super::worker::WorkerState;
use super::ClusterError;
use crate::linalg::{DenseMatrix, DenseVector};

/// Moves messages between the coordinator and the workers.
///
/// Implementations must deliver broadcasts to every worker in send order
/// and return round replies in worker-index order.
pub trait Transport: Send {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Delivers `msg` to every worker; no replies are expected.
    fn broadcast(&mut self, msg: &Message) -> Result<(), ClusterError>;

    /// Delivers `msg` to each worker in `targets` (ascending) and returns
    /// their replies in the same order.
    fn round(&mut self, targets: &[usize], msg: &Message) -> Result<Vec<Message>, ClusterError>;

    /// Delivers a distinct message to a single worker without a reply.
    fn send(&mut self, worker: usize, msg: &Message) -> Result<(), ClusterError>;
}

/// Workers live in the coordinator's process; local work runs on the rayon
/// pool.
pub struct InMemory {
    workers: Vec<WorkerState>,
}

impl InMemory {
    pub fn new(workers: Vec<WorkerState>) -> Self {
        Self { workers }
    }

    pub fn workers(&self) -> &[WorkerState] {
        &self.workers
    }
}

impl Transport for InMemory {
    fn len(&self) -> usize {
        self.workers.len()
    }

    fn broadcast(&mut self, msg: &Message) -> Result<(), ClusterError> {
        self.workers.par_iter_mut().for_each(|w| {
            w.handle(msg);
        });
        Ok(())
    }

    fn round(&mut self, targets: &[usize], msg: &Message) -> Result<Vec<Message>, ClusterError> {
        let replies: Vec<Option<Message>> = if targets.len() == 1 {
            vec![self.workers[targets[0]].handle(msg)]
        } else {
            self.workers
                .par_iter_mut()
                .enumerate()
                .filter(|(k, _)| targets.binary_search(k).is_ok())
                .map(|(_, w)| w.handle(msg))
                .collect()
        };
        replies
            .into_iter()
            .zip(targets)
            .map(|(r, &k)| r.ok_or(ClusterError::Protocol { worker: k, detail: "missing reply".into() }))
            .collect()
    }

    fn send(&mut self, worker: usize, msg: &Message) -> Result<(), ClusterError> {
        self.workers[worker].handle(msg);
        Ok(())
    }
}

struct Connection {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

/// Workers reached over TCP, one connection each.
pub struct Tcp {
    conns: Vec<Connection>,
    threads: Vec<JoinHandle<()>>,
}

fn unreachable(worker: usize, e: std::io::Error) -> ClusterError {
    ClusterError::WorkerUnreachable {
        worker,
        detail: e.to_string(),
    }
}

impl Tcp {
    /// Connects to already-running workers.
    pub fn connect<A: ToSocketAddrs + std::fmt::Debug>(endpoints: &[A]) -> Result<Self, ClusterError> {
        let mut conns = Vec::with_capacity(endpoints.len());
        for ep in endpoints {
            let stream = TcpStream::connect(ep)
                .map_err(|e| ClusterError::TransportSetupFailed(format!("connect {ep:?}: {e}")))?;
            stream
                .set_nodelay(true)
                .map_err(|e| ClusterError::TransportSetupFailed(e.to_string()))?;
            let reader = BufReader::new(
                stream
                    .try_clone()
                    .map_err(|e| ClusterError::TransportSetupFailed(e.to_string()))?,
            );
            conns.push(Connection {
                reader,
                writer: BufWriter::new(stream),
            });
        }
        Ok(Self {
            conns,
            threads: Vec::new(),
        })
    }

    /// Starts `k` worker threads listening on ephemeral loopback ports and
    /// connects to them.
    pub fn loopback(k: usize) -> Result<Self, ClusterError> {
        let mut addrs = Vec::with_capacity(k);
        let mut threads = Vec::with_capacity(k);
        for _ in 0..k {
            let listener = TcpListener::bind("127.0.0.1:0")
                .map_err(|e| ClusterError::TransportSetupFailed(e.to_string()))?;
            addrs.push(
                listener
                    .local_addr()
                    .map_err(|e| ClusterError::TransportSetupFailed(e.to_string()))?,
            );
            threads.push(std::thread::spawn(move || {
                if let Ok((stream, _)) = listener.accept() {
                    if let Err(e) = serve_connection(stream) {
                        log::warn!("loopback worker stopped: {e}");
                    }
                }
            }));
        }
        let mut t = Self::connect(&addrs)?;
        t.threads = threads;
        Ok(t)
    }

    fn write(&mut self, k: usize, msg: &Message) -> Result<(), ClusterError> {
        write_frame(&mut self.conns[k].writer, msg).map_err(|e| unreachable(k, e))
    }

    fn flush(&mut self, k: usize) -> Result<(), ClusterError> {
        self.conns[k].writer.flush().map_err(|e| unreachable(k, e))
    }

    fn read(&mut self, k: usize) -> Result<Message, ClusterError> {
        match read_frame(&mut self.conns[k].reader) {
            Ok(Some(m)) => Ok(m),
            Ok(None) => Err(ClusterError::WorkerUnreachable {
                worker: k,
                detail: "connection closed".into(),
            }),
            Err(e) => Err(unreachable(k, e)),
        }
    }
}

impl Drop for Tcp {
    fn drop(&mut self) {
        for c in &mut self.conns {
            let _ = c.writer.flush();
            let _ = c.writer.get_ref().shutdown(std::net::Shutdown::Both);
        }
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Transport for Tcp {
    fn len(&self) -> usize {
        self.conns.len()
    }

    fn broadcast(&mut self, msg: &Message) -> Result<(), ClusterError> {
        let bytes = msg.encode();
        for k in 0..self.conns.len() {
            self.conns[k].writer.write_all(&bytes).map_err(|e| unreachable(k, e))?;
            self.flush(k)?;
        }
        Ok(())
    }

    fn round(&mut self, targets: &[usize], msg: &Message) -> Result<Vec<Message>, ClusterError> {
        // all requests go out before any reply is read so workers compute concurrently
        let bytes = msg.encode();
        for &k in targets {
            self.conns[k].writer.write_all(&bytes).map_err(|e| unreachable(k, e))?;
            self.flush(k)?;
        }
        targets.iter().map(|&k| self.read(k)).collect()
    }

    fn send(&mut self, worker: usize, msg: &Message) -> Result<(), ClusterError> {
        self.write(worker, msg)?;
        self.flush(worker)
    }
}

/// Runs the worker side of one coordinator connection until it closes.
/// The first frame must be `LoadShard`.
pub fn serve_connection(stream: TcpStream) -> std::io::Result<()> {
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let mut state: Option<WorkerState> = None;
    while let Some(msg) = read_frame(&mut reader)? {
        let reply = match (&mut state, &msg) {
            (
                None,
                Message::LoadShard {
                    worker,
                    operator,
                    rows,
                    data,
                },
            ) => {
                let rows = *rows as usize;
                match (rows > 0 && data.len() % rows == 0)
                    .then(|| DenseMatrix::from_col_major(rows, data.len() / rows, data.clone()).ok())
                    .flatten()
                {
                    Some(a) => {
                        state = Some(WorkerState::new(*worker, a, *operator));
                        None
                    }
                    None => Some(Message::Error {
                        code: ErrorCode::BadRequest,
                        detail: vec![],
                    }),
                }
            }
            (None, Message::Query { .. }) => Some(Message::Error {
                code: ErrorCode::NotLoaded,
                detail: vec![],
            }),
            (None, _) => None,
            (Some(w), m) => w.handle(m),
        };
        if let Some(r) = reply {
            write_frame(&mut writer, &r)?;
            writer.flush()?;
        }
    }
    Ok(())
}

/// Accepts coordinator connections on `listener` forever, serving one at a
/// time with fresh state.
pub fn serve_forever(listener: TcpListener) -> std::io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let peer = stream.peer_addr().ok();
        log::info!("coordinator connected from {peer:?}");
        if let Err(e) = serve_connection(stream) {
            log::warn!("connection from {peer:?} ended with error: {e}");
        }
    }
    Ok(())
}

pub(crate) fn load_messages(
    index: usize,
    a: &DenseMatrix,
    y: Option<&DenseVector>,
    operator: super::Operator,
) -> Vec<Message> {
    let mut msgs = vec![Message::LoadShard {
        worker: index as u32,
        operator,
        rows: a.rows() as u64,
        data: a.as_slice().to_vec(),
    }];
    if let Some(y) = y {
        msgs.push(Message::LoadResponses {
            payload: y.as_slice().to_vec(),
        });
    }
    msgs
}
