//! Coordinator/worker messages and their binary framing.
//!
//! Every message is one frame, little-endian:
//!
//! ```text
//! u32 length | u8 tag | u32 kind | u64 weight | f64 payload ...
//! ```
//!
//! `length` counts the bytes after itself, so a frame with `p` payload reals
//! occupies `FRAME_OVERHEAD + 8p` bytes on the wire.

use std::io::{self, Read, Write};

use crate::linalg::DenseVector;

/// Header bytes per frame: length, tag, kind and weight.
pub const FRAME_OVERHEAD: usize = 4 + 1 + 4 + 8;
/// Upper bound on a single frame, guards against corrupt length prefixes.
pub const MAX_FRAME_LEN: usize = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorKind {
    /// Current outer iterate, used by workers as the gradient anchor.
    Iterate,
    /// Unit vector to project out of the local data.
    Deflation,
    /// Global mean to subtract from every local row.
    Mean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarKind {
    Shift,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlKind {
    BeginEigenvector,
    End,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryKind {
    /// `H_k w − anchor` for the payload `w`.
    Gradient,
    /// Local quadratic form `wᵀ M_k w`.
    Rayleigh,
    /// Top eigenpair of the local matrix, reply `[λ, u...]`.
    LocalTopEigen,
    LocalMean,
    /// Payload is a `d × S` panel (`arg = S`); reply `[VᵀA_kᵀA_kV, VᵀA_kᵀy_k]`.
    NormalEquations,
    /// `H₁⁻¹ g`; only meaningful on worker 0.
    NewtonStep,
    /// Reply carries `(m_k, d)`.
    Describe,
    /// Last vector broadcast, empty when none.
    LastBroadcast,
    /// Full local data matrix, column-major.
    FetchShard,
    /// Dense local matrix `M_k`, column-major.
    LocalMatrix,
}

/// Which local matrix `M_k` a worker's operator `H_k = λ̄I − M_k` uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    /// `A_kᵀA_k / m_k`
    Covariance,
    /// `(1/m_k) Σ y_i (a_i a_iᵀ − I)`
    Stein,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCode {
    NotPositiveDefinite = 1,
    MissingResponses = 2,
    BadRequest = 3,
    NotLoaded = 4,
    Numerical = 5,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Message {
    BroadcastVector {
        kind: VectorKind,
        payload: DenseVector,
    },
    BroadcastScalar {
        kind: ScalarKind,
        value: f64,
    },
    GradientReply {
        worker: u32,
        weight: u64,
        payload: DenseVector,
    },
    ScalarReply {
        worker: u32,
        weight: u64,
        value: f64,
    },
    Control {
        kind: ControlKind,
        index: u64,
    },
    Query {
        kind: QueryKind,
        arg: u64,
        payload: Vec<f64>,
    },
    VectorReply {
        worker: u32,
        weight: u64,
        payload: Vec<f64>,
    },
    LoadShard {
        worker: u32,
        operator: Operator,
        rows: u64,
        data: Vec<f64>,
    },
    LoadResponses {
        payload: Vec<f64>,
    },
    Error {
        code: ErrorCode,
        detail: Vec<f64>,
    },
}

const TAG_BROADCAST_VECTOR: u8 = 1;
const TAG_BROADCAST_SCALAR: u8 = 2;
const TAG_GRADIENT_REPLY: u8 = 3;
const TAG_SCALAR_REPLY: u8 = 4;
const TAG_CONTROL: u8 = 5;
const TAG_QUERY: u8 = 6;
const TAG_VECTOR_REPLY: u8 = 7;
const TAG_LOAD_SHARD: u8 = 8;
const TAG_LOAD_RESPONSES: u8 = 9;
const TAG_ERROR: u8 = 10;

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

impl VectorKind {
    fn code(self) -> u32 {
        match self {
            VectorKind::Iterate => 0,
            VectorKind::Deflation => 1,
            VectorKind::Mean => 2,
        }
    }

    fn from_code(c: u32) -> io::Result<Self> {
        Ok(match c {
            0 => VectorKind::Iterate,
            1 => VectorKind::Deflation,
            2 => VectorKind::Mean,
            _ => return Err(invalid(format!("vector kind {c}"))),
        })
    }
}

impl QueryKind {
    const ALL: [QueryKind; 10] = [
        QueryKind::Gradient,
        QueryKind::Rayleigh,
        QueryKind::LocalTopEigen,
        QueryKind::LocalMean,
        QueryKind::NormalEquations,
        QueryKind::NewtonStep,
        QueryKind::Describe,
        QueryKind::LastBroadcast,
        QueryKind::FetchShard,
        QueryKind::LocalMatrix,
    ];

    fn code(self) -> u32 {
        Self::ALL.iter().position(|&k| k == self).unwrap() as u32
    }

    fn from_code(c: u32) -> io::Result<Self> {
        Self::ALL
            .get(c as usize)
            .copied()
            .ok_or_else(|| invalid(format!("query kind {c}")))
    }
}

impl ErrorCode {
    fn from_code(c: u32) -> io::Result<Self> {
        Ok(match c {
            1 => ErrorCode::NotPositiveDefinite,
            2 => ErrorCode::MissingResponses,
            3 => ErrorCode::BadRequest,
            4 => ErrorCode::NotLoaded,
            5 => ErrorCode::Numerical,
            _ => return Err(invalid(format!("error code {c}"))),
        })
    }
}

impl Message {
    /// Number of `f64` values carried.
    pub fn payload_len(&self) -> usize {
        match self {
            Message::BroadcastVector { payload, .. } | Message::GradientReply { payload, .. } => {
                payload.dim()
            }
            Message::BroadcastScalar { .. } | Message::ScalarReply { .. } => 1,
            Message::Control { .. } => 0,
            Message::Query { payload, .. }
            | Message::VectorReply { payload, .. }
            | Message::LoadResponses { payload } => payload.len(),
            Message::LoadShard { data, .. } => data.len(),
            Message::Error { detail, .. } => detail.len(),
        }
    }

    pub fn payload_bytes(&self) -> usize {
        8 * self.payload_len()
    }

    pub fn wire_len(&self) -> usize {
        FRAME_OVERHEAD + self.payload_bytes()
    }

    fn header(&self) -> (u8, u32, u64) {
        match self {
            Message::BroadcastVector { kind, .. } => (TAG_BROADCAST_VECTOR, kind.code(), 0),
            Message::BroadcastScalar { kind, .. } => (
                TAG_BROADCAST_SCALAR,
                match kind {
                    ScalarKind::Shift => 0,
                },
                0,
            ),
            Message::GradientReply { worker, weight, .. } => (TAG_GRADIENT_REPLY, *worker, *weight),
            Message::ScalarReply { worker, weight, .. } => (TAG_SCALAR_REPLY, *worker, *weight),
            Message::Control { kind, index } => (
                TAG_CONTROL,
                match kind {
                    ControlKind::BeginEigenvector => 0,
                    ControlKind::End => 1,
                },
                *index,
            ),
            Message::Query { kind, arg, .. } => (TAG_QUERY, kind.code(), *arg),
            Message::VectorReply { worker, weight, .. } => (TAG_VECTOR_REPLY, *worker, *weight),
            Message::LoadShard {
                worker,
                operator,
                rows,
                ..
            } => {
                let op = match operator {
                    Operator::Covariance => 0,
                    Operator::Stein => 1,
                };
                (TAG_LOAD_SHARD, (worker << 1) | op, *rows)
            }
            Message::LoadResponses { .. } => (TAG_LOAD_RESPONSES, 0, 0),
            Message::Error { code, .. } => (TAG_ERROR, *code as u32, 0),
        }
    }

    fn payload(&self) -> &[f64] {
        match self {
            Message::BroadcastVector { payload, .. } | Message::GradientReply { payload, .. } => {
                payload.as_slice()
            }
            Message::BroadcastScalar { value, .. } | Message::ScalarReply { value, .. } => {
                std::slice::from_ref(value)
            }
            Message::Control { .. } => &[],
            Message::Query { payload, .. }
            | Message::VectorReply { payload, .. }
            | Message::LoadResponses { payload } => payload,
            Message::LoadShard { data, .. } => data,
            Message::Error { detail, .. } => detail,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let (tag, kind, weight) = self.header();
        let payload = self.payload();
        let mut out = Vec::with_capacity(FRAME_OVERHEAD + 8 * payload.len());
        out.extend_from_slice(&((FRAME_OVERHEAD - 4 + 8 * payload.len()) as u32).to_le_bytes());
        out.push(tag);
        out.extend_from_slice(&kind.to_le_bytes());
        out.extend_from_slice(&weight.to_le_bytes());
        for v in payload {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Decodes a frame body (everything after the length prefix).
    pub fn decode_body(body: &[u8]) -> io::Result<Message> {
        let head = FRAME_OVERHEAD - 4;
        if body.len() < head || (body.len() - head) % 8 != 0 {
            return Err(invalid(format!("bad frame body length {}", body.len())));
        }
        let tag = body[0];
        let kind = u32::from_le_bytes(body[1..5].try_into().unwrap());
        let weight = u64::from_le_bytes(body[5..13].try_into().unwrap());
        let vals: Vec<f64> = body[head..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let single = |vals: &[f64]| -> io::Result<f64> {
            match vals {
                [v] => Ok(*v),
                _ => Err(invalid("scalar frame must carry one value")),
            }
        };
        Ok(match tag {
            TAG_BROADCAST_VECTOR => Message::BroadcastVector {
                kind: VectorKind::from_code(kind)?,
                payload: DenseVector::from(vals),
            },
            TAG_BROADCAST_SCALAR => {
                if kind != 0 {
                    return Err(invalid(format!("scalar kind {kind}")));
                }
                Message::BroadcastScalar {
                    kind: ScalarKind::Shift,
                    value: single(&vals)?,
                }
            }
            TAG_GRADIENT_REPLY => Message::GradientReply {
                worker: kind,
                weight,
                payload: DenseVector::from(vals),
            },
            TAG_SCALAR_REPLY => Message::ScalarReply {
                worker: kind,
                weight,
                value: single(&vals)?,
            },
            TAG_CONTROL => Message::Control {
                kind: match kind {
                    0 => ControlKind::BeginEigenvector,
                    1 => ControlKind::End,
                    _ => return Err(invalid(format!("control kind {kind}"))),
                },
                index: weight,
            },
            TAG_QUERY => Message::Query {
                kind: QueryKind::from_code(kind)?,
                arg: weight,
                payload: vals,
            },
            TAG_VECTOR_REPLY => Message::VectorReply {
                worker: kind,
                weight,
                payload: vals,
            },
            TAG_LOAD_SHARD => Message::LoadShard {
                worker: kind >> 1,
                operator: if kind & 1 == 0 {
                    Operator::Covariance
                } else {
                    Operator::Stein
                },
                rows: weight,
                data: vals,
            },
            TAG_LOAD_RESPONSES => Message::LoadResponses { payload: vals },
            TAG_ERROR => Message::Error {
                code: ErrorCode::from_code(kind)?,
                detail: vals,
            },
            other => return Err(invalid(format!("unknown tag {other}"))),
        })
    }
}

pub fn write_frame<W: Write>(w: &mut W, msg: &Message) -> io::Result<()> {
    w.write_all(&msg.encode())
}

/// Reads one frame. Returns `Ok(None)` on a clean end of stream before the
/// length prefix.
pub fn read_frame<R: Read>(r: &mut R) -> io::Result<Option<Message>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let len = u32::from_le_bytes(len) as usize;
    if len > MAX_FRAME_LEN {
        return Err(invalid(format!("frame of {len} bytes exceeds limit")));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)?;
    Message::decode_body(&body).map(Some)
}
