use std::fmt::Write as _;
use std::path::Path;

use super::{log10_error, RunRecord};

pub const CSV_HEADER: &str = "kind,rep,k,m,d,delta,l,t,t_inner,skewness,noise_var,link,method,metric,error,log10_error,wall_ms,uplink_bytes";

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn row(r: &RunRecord) -> String {
    [
        r.kind.name().to_string(),
        r.rep.map_or_else(|| "mean".to_string(), |i| i.to_string()),
        r.k.to_string(),
        r.m.to_string(),
        r.d.to_string(),
        float(r.delta),
        r.l.to_string(),
        r.t.to_string(),
        r.t_inner.to_string(),
        opt_float(r.skewness),
        opt_float(r.noise_var),
        r.link.map(|l| l.name().to_string()).unwrap_or_default(),
        r.method.name().to_string(),
        r.metric.name().to_string(),
        float(r.error),
        float(r.log10_error),
        opt_float(r.wall_ms),
        float(r.uplink_bytes),
    ]
    .join(",")
}

pub fn to_csv(records: &[RunRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(out, "{}", row(r)).unwrap();
    }
    out
}

pub fn write_csv(path: &Path, records: &[RunRecord]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, to_csv(records))
}

fn same_group(a: &RunRecord, b: &RunRecord) -> bool {
    a.k == b.k
        && a.delta == b.delta
        && a.l == b.l
        && a.t == b.t
        && a.t_inner == b.t_inner
        && a.method == b.method
        && a.metric == b.metric
}

/// Averages per-run rows over repetitions. Groups appear in the order of
/// their first per-run row; `log10_error` of a mean row is the log of the
/// mean error.
pub fn mean_records(records: &[RunRecord]) -> Vec<RunRecord> {
    let mut groups: Vec<(RunRecord, Vec<&RunRecord>)> = Vec::new();
    for r in records.iter().filter(|r| r.rep.is_some()) {
        match groups.iter_mut().find(|(head, _)| same_group(head, r)) {
            Some((_, members)) => members.push(r),
            None => groups.push((r.clone(), vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(head, members)| {
            let n = members.len() as f64;
            let error = members.iter().map(|r| r.error).sum::<f64>() / n;
            let wall_ms = members
                .iter()
                .map(|r| r.wall_ms)
                .sum::<Option<f64>>()
                .map(|s| s / n);
            RunRecord {
                rep: None,
                error,
                log10_error: log10_error(error),
                wall_ms,
                uplink_bytes: members.iter().map(|r| r.uplink_bytes).sum::<f64>() / n,
                ..head
            }
        })
        .collect()
}
