//! Binary matrix files and text truth sidecars.
//!
//! Matrix file layout (little-endian): `b"DEIG"`, `u32` version, `u64` rows,
//! `u64` cols, then `rows*cols` column-major `f64`.
//!
//! A dataset saved at `path` consists of `path` (samples), optionally
//! `path.y` (responses, one column) and `path.truth` (text, one record per
//! line: `name rows cols v0 v1 ...`, column-major).

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{DataError, Dataset, Truth};
use crate::linalg::{DenseMatrix, DenseVector};

pub const MAGIC: &[u8; 4] = b"DEIG";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8;

pub fn encode_matrix(m: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<DenseMatrix, DataError> {
    if bytes.len() < HEADER_LEN {
        return Err(DataError::Format("truncated header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(DataError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(DataError::Format(format!("unsupported version {version}")));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| DataError::Format("dimension overflow".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != count * 8 {
        return Err(DataError::Format(format!(
            "payload is {} bytes, expected {}",
            payload.len(),
            count * 8
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(DenseMatrix::from_col_major(rows, cols, data)?)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<(), DataError> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_matrix(m))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix, DataError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_matrix(&bytes)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn responses_path(path: &Path) -> PathBuf {
    with_suffix(path, ".y")
}

pub fn truth_path(path: &Path) -> PathBuf {
    with_suffix(path, ".truth")
}

fn vector_matrix(v: &[f64]) -> DenseMatrix {
    DenseMatrix::from_col_major(v.len(), 1, v.to_vec()).expect("finite vector")
}

fn record(out: &mut String, name: &str, m: &DenseMatrix) {
    out.push_str(&format!("{name} {} {}", m.rows(), m.cols()));
    for v in m.as_slice() {
        // round-trip exact
        out.push_str(&format!(" {v:e}"));
    }
    out.push('\n');
}

pub fn encode_truth(t: &Truth) -> String {
    let mut out = String::new();
    if let Some(s) = &t.sigma {
        record(&mut out, "sigma", s);
    }
    if let Some(u) = &t.u {
        record(&mut out, "u", u);
    }
    if let Some(l) = &t.lambda {
        record(&mut out, "lambda", &vector_matrix(l));
    }
    if let Some(b) = &t.beta {
        record(&mut out, "beta", &vector_matrix(b.as_slice()));
    }
    if let Some(g) = &t.gamma {
        record(&mut out, "gamma", &vector_matrix(g.as_slice()));
    }
    out
}

pub fn decode_truth(text: &str) -> Result<Truth, DataError> {
    let mut t = Truth::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| DataError::Format(format!("truth line {}: {msg}", lineno + 1));
        let mut it = line.split_ascii_whitespace();
        let name = it.next().unwrap();
        let rows: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("rows"))?;
        let cols: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("cols"))?;
        let data = it
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad("value"))?;
        let m = DenseMatrix::from_col_major(rows, cols, data).map_err(|e| bad(&e.to_string()))?;
        match name {
            "sigma" => t.sigma = Some(m),
            "u" => t.u = Some(m),
            "lambda" => t.lambda = Some(m.into_vec()),
            "beta" => t.beta = Some(DenseVector::from(m.into_vec())),
            "gamma" => t.gamma = Some(DenseVector::from(m.into_vec())),
            other => return Err(bad(&format!("unknown record '{other}'"))),
        }
    }
    Ok(t)
}

pub fn save_dataset(path: &Path, ds: &Dataset) -> Result<(), DataError> {
    write_matrix(path, &ds.a)?;
    if let Some(y) = &ds.y {
        write_matrix(&responses_path(path), &vector_matrix(y.as_slice()))?;
    }
    if let Some(t) = &ds.truth {
        fs::write(truth_path(path), encode_truth(t))?;
    }
    Ok(())
}

/// Loads the sample matrix and whichever companion files exist.
pub fn load_dataset(path: &Path) -> Result<Dataset, DataError> {
    let a = read_matrix(path)?;
    let yp = responses_path(path);
    let y = if yp.exists() {
        let m = read_matrix(&yp)?;
        if m.cols() != 1 || m.rows() != a.rows() {
            return Err(DataError::Format(format!(
                "responses are {}x{}, expected {}x1",
                m.rows(),
                m.cols(),
                a.rows()
            )));
        }
        Some(DenseVector::from(m.into_vec()))
    } else {
        None
    };
    let tp = truth_path(path);
    let truth = if tp.exists() {
        Some(decode_truth(&fs::read_to_string(tp)?)?)
    } else {
        None
    };
    Ok(Dataset { a, y, truth })
}
