//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Oracles are computed here with plain
//! loops (Gaussian elimination, power iteration, cubic roots) rather than
//! the library's own linear algebra.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use distpca::apps::{sim_fit, spawn_sim_cluster, stein_matrix};
use distpca::baselines::{dc_aggregate, dc_pca, oracle_pca};
use distpca::cluster::{Cluster, Operator, TransportKind};
use distpca::datagen::{
    balanced_sizes, make_covariance, make_pcr_instance, make_sim_instance, sample_gaussian, shard, CovarianceSpec,
    Link, Shard,
};
use distpca::experiment::{
    instance, run_experiment, EtaChoice, ExperimentKind, ExperimentSpec, Method, Metric, RunRecord,
};
use distpca::linalg::{random_orthogonal, sym_eigendecompose, DenseMatrix, DenseVector};
use distpca::metrics::{capture_bound_holds, gapfree_error_top1, relative_gap, sign_corrected_l2, SpectrumReference};
use distpca::solver::{init_estimates, inner_iterates, top_eigenvector, top_l_subspace, EtaRule, SolverConfig};

type Check = Result<String, String>;

// ---------------------------------------------------------------- oracles

fn rows_of(a: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|i| (0..a.cols()).map(|j| a[(i, j)]).collect()).collect()
}

/// `AᵀA / n` by explicit triple loop.
fn naive_cov(a: &DenseMatrix) -> Vec<Vec<f64>> {
    let rows = rows_of(a);
    let d = a.cols();
    let n = rows.len() as f64;
    let mut s = vec![vec![0.0; d]; d];
    for r in &rows {
        for i in 0..d {
            for j in 0..d {
                s[i][j] += r[i] * r[j];
            }
        }
    }
    s.iter_mut().flatten().for_each(|x| *x /= n);
    s
}

/// Solves `M x = b` by Gaussian elimination with partial pivoting.
fn gauss_solve(m: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut a: Vec<Vec<f64>> = m.iter().zip(b).map(|(r, &bi)| r.iter().copied().chain([bi]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..=n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (a[r][n] - s) / a[r][r];
    }
    x
}

fn mv(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn vnorm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn vdist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn normalize(x: &[f64]) -> Vec<f64> {
    let n = vnorm(x);
    x.iter().map(|v| v / n).collect()
}

/// Dominant eigenvector of a symmetric matrix shifted to be positive
/// definite, by plain power iteration.
fn power_top(m: &[Vec<f64>], iters: usize) -> Vec<f64> {
    let d = m.len();
    let shift: f64 = m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let mut w: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * i as f64).collect();
    for _ in 0..iters {
        let mut next = mv(m, &w);
        next.iter_mut().zip(&w).for_each(|(n, x)| *n += shift * x);
        w = normalize(&next);
    }
    w
}

/// Spectral norm of a symmetric matrix: power iteration on `M²`.
fn sym_norm(m: &[Vec<f64>]) -> f64 {
    let d = m.len();
    let mut w: Vec<f64> = (0..d).map(|i| 1.0 + (i as f64 * 0.37).sin()).collect();
    w = normalize(&w);
    let mut est = 0.0;
    for _ in 0..5000 {
        let mw = mv(m, &mv(m, &w));
        est = vnorm(&mw);
        w = normalize(&mw);
    }
    est.sqrt()
}

/// Eigenvalues of a symmetric 3×3 matrix from the characteristic cubic
/// (trigonometric form), descending.
fn cubic_eigenvalues(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q; 3];
    }
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

// ---------------------------------------------------------------- helpers

fn gaussian_instance(d: usize, n: usize, k: usize, delta: f64, seed: u64) -> (DenseMatrix, Vec<Shard>) {
    let cov = make_covariance(&CovarianceSpec::new(d, delta, seed)).unwrap();
    let ds = sample_gaussian(n, &cov.sigma, seed + 1000).unwrap();
    let shards = shard(&ds, &balanced_sizes(n, k), seed + 2000).unwrap();
    (ds.a, shards)
}

fn mean_rows(recs: &[RunRecord], method: Method, metric: Metric) -> Vec<&RunRecord> {
    recs.iter().filter(|r| r.rep.is_none() && r.method == method && r.metric == metric).collect()
}

/// Mean over repetitions of per-run `log10_error` for rows matching `pick`.
fn mean_log(recs: &[RunRecord], pick: impl Fn(&RunRecord) -> bool) -> f64 {
    let v: Vec<f64> = recs.iter().filter(|r| r.rep.is_some() && pick(r)).map(|r| r.log10_error).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn fail_if(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Err(msg.into())
    } else {
        Ok(())
    }
}

fn criterion1_spec() -> ExperimentSpec {
    ExperimentSpec {
        kind: ExperimentKind::VaryOuterIterations,
        d: 20,
        m: 200,
        k: vec![20],
        delta: vec![1.0],
        l: vec![1],
        t: vec![2, 5, 10, 20, 30],
        t_inner: vec![5],
        monte_carlo: 20,
        eta: EtaChoice::Scaled,
        c0: 1.5,
        ..ExperimentSpec::default()
    }
}

/// Both readings of "mean log error": the log of the mean (the CSV mean
/// row) and the mean of per-run logs. Returns `(log_of_mean, mean_of_log)`.
fn both_logs(recs: &[RunRecord], method: Method, key: impl Fn(&RunRecord) -> bool + Copy) -> (f64, f64) {
    let row = mean_rows(recs, method, Metric::Gapfree).into_iter().find(|r| key(r)).expect("mean row");
    (row.log10_error, mean_log(recs, |r| r.method == method && r.metric == Metric::Gapfree && key(r)))
}

// ---------------------------------------------------------------- criteria

fn criterion1() -> Check {
    let spec = criterion1_spec();
    let recs = run_experiment(&spec).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for (name, pick) in [("log-of-mean", 0usize), ("mean-of-log", 1)] {
        let get = |m: Method, t: usize| {
            let p = both_logs(&recs, m, |r| r.t == t);
            if pick == 0 {
                p.0
            } else {
                p.1
            }
        };
        let ours: Vec<f64> = spec.t.iter().map(|&t| get(Method::Ours, t)).collect();
        for w in ours.windows(2) {
            fail_if(w[1] > w[0] + 0.05, format!("{name}: not monotone in T: {ours:.3?}"))?;
        }
        let oracle = get(Method::Oracle, 30);
        let gap = (ours[4] - oracle).abs();
        fail_if(gap > 0.15, format!("{name}: T=30 ours {:.3} vs oracle {oracle:.3}", ours[4]))?;
        detail.push(format!("{name} ours {ours:.3?}, oracle {oracle:.3}"));
    }
    Ok(detail.join("; "))
}

fn criterion2() -> Check {
    let d = 10;
    let (a, shards) = gaussian_instance(d, 500, 1, 1.0, 42);
    let mut cluster = Cluster::spawn(&shards, Operator::Covariance, TransportKind::InMemory).unwrap();
    let cfg = SolverConfig {
        outer: 30,
        inner: 1,
        record_trace: true,
        ..SolverConfig::default()
    };
    let res = top_eigenvector(&mut cluster, &cfg).map_err(|e| e.to_string())?;
    // the sample matrix is shard 0 after shuffling; AᵀA/n is order-free
    let sigma = naive_cov(&a);
    let shift = res.shifts[0];
    let h: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { shift - sigma[i][j] } else { -sigma[i][j] }).collect())
        .collect();
    let mut w = res.trace[0].iterate.as_slice().to_vec();
    let mut worst: f64 = 0.0;
    for rec in &res.trace[1..] {
        w = normalize(&gauss_solve(&h, &w));
        worst = worst.max(vdist(&w, rec.iterate.as_slice()));
    }
    fail_if(worst > 1e-10, format!("iterates differ by {worst:.3e}"))?;
    let u1 = power_top(&sigma, 3000);
    let align = res.top().as_slice().iter().zip(&u1).map(|(x, y)| x * y).sum::<f64>().abs();
    fail_if(align < 1.0 - 1e-8, format!("|<w_T, u1>| = {align:.12}"))?;
    Ok(format!("max iterate deviation {worst:.2e}, |<w_T,u1>| = 1 - {:.1e}", 1.0 - align))
}

fn criterion3() -> Check {
    let d = 8;
    let mut worst_ratio: f64 = 0.0;
    for seed in 0..10u64 {
        let (_, shards) = gaussian_instance(d, 400, 2, 0.5 + 0.2 * seed as f64, 300 + seed);
        let pooled: Vec<DenseMatrix> = shards.iter().map(|s| s.a.clone()).collect();
        let pooled = DenseMatrix::vstack(&pooled.iter().collect::<Vec<_>>());
        let sigma = naive_cov(&pooled);
        let sigma1 = naive_cov(&shards[0].a);
        let diff: Vec<Vec<f64>> =
            sigma.iter().zip(&sigma1).map(|(r, s)| r.iter().zip(s).map(|(a, b)| a - b).collect()).collect();
        let kappa = sym_norm(&diff);
        let eta = 2.0 * kappa;
        let mut cluster = Cluster::spawn(&shards, Operator::Covariance, TransportKind::InMemory).unwrap();
        let init = init_estimates(&mut cluster, eta).map_err(|e| e.to_string())?;
        cluster.set_shift(init.shift).map_err(|e| e.to_string())?;
        let anchor = init.w0.clone();
        cluster.broadcast_iterate(&anchor).map_err(|e| e.to_string())?;
        let iters = inner_iterates(&mut cluster, &anchor, &anchor, 10).map_err(|e| e.to_string())?;
        let h: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { init.shift - sigma[i][j] } else { -sigma[i][j] }).collect())
            .collect();
        let target = gauss_solve(&h, anchor.as_slice());
        let bound = 2.0 * kappa / eta;
        for (j, pair) in iters.windows(2).enumerate() {
            let before = vdist(pair[0].as_slice(), &target);
            let after = vdist(pair[1].as_slice(), &target);
            fail_if(
                after > bound * before + 1e-12,
                format!("instance {seed}, step {j}: {after:.3e} > {bound:.3} * {before:.3e}"),
            )?;
            if before > 1e-10 {
                worst_ratio = worst_ratio.max(after / before);
            }
        }
    }
    Ok(format!("10 instances, worst observed step ratio {worst_ratio:.3} (bound 1.0 at eta = 2 kappa)"))
}

fn criterion4() -> Check {
    let spec = criterion1_spec();
    let cell = spec.cells()[0];
    let mut runs = 0;
    for rep in 0..spec.monte_carlo {
        let inst = instance(&spec, &cell, rep).map_err(|e| e.to_string())?;
        let truth = inst.truth.as_ref().unwrap();
        let delta = relative_gap(&truth.values, 1);
        let empirical = SpectrumReference::empirical(&inst.data.a).map_err(|e| e.to_string())?;
        let sigma = naive_cov(&inst.data.a);
        for &t in &spec.t {
            let cfg = SolverConfig {
                outer: t,
                inner: cell.t_inner,
                eta: EtaRule::Scaled { c0: spec.c0 },
                ..SolverConfig::default()
            };
            let mut cluster = Cluster::spawn(&inst.shards, Operator::Covariance, TransportKind::InMemory).unwrap();
            let w = top_eigenvector(&mut cluster, &cfg).map_err(|e| e.to_string())?.top();
            let eps = gapfree_error_top1(&empirical, &w, delta).map_err(|e| e.to_string())?;
            let captured: f64 = w.as_slice().iter().zip(mv(&sigma, w.as_slice())).map(|(a, b)| a * b).sum();
            fail_if(
                !capture_bound_holds(empirical.values[0], delta, eps, captured),
                format!("rep {rep}, T={t}: captured {captured:.6} with eps {eps:.3e}"),
            )?;
            runs += 1;
        }
    }
    Ok(format!("bound held in {runs}/{runs} runs"))
}

fn criterion5() -> Check {
    let deltas = vec![2.0, 1.0, 0.5, 0.25];
    let spec = ExperimentSpec {
        kind: ExperimentKind::VaryEigengap,
        d: 20,
        m: 200,
        k: vec![20],
        delta: deltas.clone(),
        t: vec![40],
        t_inner: vec![10],
        monte_carlo: 20,
        eta: EtaChoice::Scaled,
        c0: 1.5,
        ..ExperimentSpec::default()
    };
    let recs = run_experiment(&spec).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for (name, pick) in [("log-of-mean", 0usize), ("mean-of-log", 1)] {
        let get = |m: Method, d: f64| {
            let p = both_logs(&recs, m, |r| r.delta == d);
            if pick == 0 {
                p.0
            } else {
                p.1
            }
        };
        let ours: Vec<f64> = deltas.iter().map(|&d| get(Method::Ours, d)).collect();
        let oracle: Vec<f64> = deltas.iter().map(|&d| get(Method::Oracle, d)).collect();
        for w in ours.windows(2) {
            fail_if(w[1] < w[0], format!("{name}: decreases as 1/delta grows: {ours:.3?}"))?;
        }
        for (i, (o, r)) in ours.iter().zip(&oracle).enumerate() {
            fail_if((o - r).abs() > 0.15, format!("{name}: delta={} ours {o:.3} oracle {r:.3}", deltas[i]))?;
        }
        detail.push(format!("{name} ours {ours:.3?} oracle {oracle:.3?}"));
    }
    Ok(detail.join("; "))
}

fn criterion6() -> Check {
    let ks = vec![10, 40, 160, 640];
    let spec = ExperimentSpec {
        kind: ExperimentKind::VaryMachines,
        d: 20,
        m: 200,
        k: ks.clone(),
        delta: vec![0.5],
        skewness: Some(4.0),
        t: vec![200],
        t_inner: vec![10],
        monte_carlo: 20,
        eta: EtaChoice::Scaled,
        c0: 3.0,
        ..ExperimentSpec::default()
    };
    let recs = run_experiment(&spec).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for (name, pick) in [("log-of-mean", 0usize), ("mean-of-log", 1)] {
        let get = |m: Method, k: usize| {
            let p = both_logs(&recs, m, |r| r.k == k);
            if pick == 0 {
                p.0
            } else {
                p.1
            }
        };
        for &k in &ks {
            let (o, r) = (get(Method::Ours, k), get(Method::Oracle, k));
            fail_if((o - r).abs() > 0.15, format!("{name}: K={k} ours {o:.3} oracle {r:.3}"))?;
        }
        let last = *ks.last().unwrap();
        let (o, dc) = (get(Method::Ours, last), get(Method::Dc, last));
        fail_if(dc <= o, format!("{name}: K={last} dc {dc:.3} not above ours {o:.3}"))?;
        let trail: Vec<String> = ks
            .iter()
            .map(|&k| format!("K={k} {:.2}/{:.2}/{:.2}", get(Method::Ours, k), get(Method::Oracle, k), get(Method::Dc, k)))
            .collect();
        detail.push(format!("{name} ours/oracle/dc {}", trail.join(" ")));
    }
    Ok(detail.join("; "))
}

fn projector(u: &DenseMatrix) -> DenseMatrix {
    u.matmul(&u.transpose())
}

fn criterion7() -> Check {
    let mut worst_proj: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    for seed in 0..5u64 {
        let (a, shards) = gaussian_instance(12, 600, 1, 1.0, 700 + seed);
        for l in 1..=3 {
            let blocks = vec![shards[0].a.clone()];
            let dc = dc_pca(&blocks, l).map_err(|e| e.to_string())?;
            let oracle = oracle_pca(&a, l).map_err(|e| e.to_string())?;
            let dist = projector(&dc.u_hat).max_abs_diff(&projector(&oracle.u_hat));
            worst_proj = worst_proj.max(dist);
            fail_if(dist >= 1e-10, format!("K=1 projector distance {dist:.3e} (L={l})"))?;
        }
        let (_, shards) = gaussian_instance(12, 600, 6, 1.0, 800 + seed);
        let blocks: Vec<DenseMatrix> = shards.iter().map(|s| s.a.clone()).collect();
        for l in 1..=3 {
            let agg = dc_aggregate(&blocks, l).map_err(|e| e.to_string())?;
            let vals = sym_eigendecompose(&agg).map_err(|e| e.to_string())?.values;
            for v in &vals {
                fail_if(*v < -1e-12 || *v > 1.0 + 1e-12, format!("eigenvalue {v:.3e} outside [0,1]"))?;
            }
            let tr = (0..12).map(|i| agg[(i, i)]).sum::<f64>();
            worst_trace = worst_trace.max((tr - l as f64).abs());
            fail_if((tr - l as f64).abs() > 1e-10, format!("trace {tr} != {l}"))?;
        }
    }
    Ok(format!("projector distance <= {worst_proj:.1e}, |trace - L| <= {worst_trace:.1e}"))
}

fn criterion8() -> Check {
    let mut worst_orth: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for seed in 0..5u64 {
        let (_, shards) = gaussian_instance(15, 800, 4, 0.5 + 0.5 * seed as f64, 900 + seed);
        let mut cluster = Cluster::spawn(&shards, Operator::Covariance, TransportKind::InMemory).unwrap();
        let cfg = SolverConfig {
            outer: 20,
            inner: 5,
            l: 3,
            ..SolverConfig::default()
        };
        let res = top_l_subspace(&mut cluster, &cfg).map_err(|e| e.to_string())?;
        let orth = res.v.gram().max_abs_diff(&DenseMatrix::identity(3));
        worst_orth = worst_orth.max(orth);
        fail_if(orth > 1e-8, format!("VᵀV deviates by {orth:.3e}"))?;
        for k in 0..cluster.k() {
            let ak = cluster.fetch_shard(k).map_err(|e| e.to_string())?;
            for j in 0..3 {
                let r = ak.matvec(res.v.col(j)).as_slice().iter().fold(0.0f64, |m, x| m.max(x.abs()));
                worst_res = worst_res.max(r);
                fail_if(r > 1e-9, format!("worker {k}: |A_k v_{}| = {r:.3e}", j + 1))?;
            }
        }
    }
    Ok(format!("|VᵀV - I| <= {worst_orth:.1e}, |A_k v_j| <= {worst_res:.1e}"))
}

fn criterion9() -> Check {
    // distributed vs pooled normal equations, compared entrywise relative
    // to the largest entry since both are unnormalized sums
    let mut worst: f64 = 0.0;
    for seed in 0..5u64 {
        let d = 10;
        let cov = make_covariance(&CovarianceSpec::new(d, 0.5, 40 + seed)).unwrap();
        let ds = make_pcr_instance(&cov, 3, 400, 0.2, 50 + seed, 60 + seed).unwrap();
        let shards = shard(&ds, &balanced_sizes(400, 4), 70 + seed).unwrap();
        let v = random_orthogonal(d, 80 + seed).leading_columns(3);
        let mut cluster = Cluster::spawn(&shards, Operator::Covariance, TransportKind::InMemory).unwrap();
        let (gram, rhs) = cluster.normal_equations(&v).map_err(|e| e.to_string())?;
        let av: Vec<Vec<f64>> = rows_of(&ds.a).iter().map(|r| (0..3).map(|j| r.iter().zip(v.col(j)).map(|(a, b)| a * b).sum()).collect()).collect();
        let y = ds.y.as_ref().unwrap().as_slice();
        let mut g = vec![vec![0.0; 3]; 3];
        let mut b = vec![0.0; 3];
        for (row, yi) in av.iter().zip(y) {
            for i in 0..3 {
                b[i] += row[i] * yi;
                for j in 0..3 {
                    g[i][j] += row[i] * row[j];
                }
            }
        }
        let scale = g.iter().flatten().chain(&b).fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..3 {
            worst = worst.max((rhs.as_slice()[i] - b[i]).abs() / scale);
            for j in 0..3 {
                worst = worst.max((gram[(i, j)] - g[i][j]).abs() / scale);
            }
        }
    }
    fail_if(worst > 1e-12, format!("normal equations differ by {worst:.3e} (relative)"))?;

    let spec = ExperimentSpec {
        kind: ExperimentKind::Pcr,
        d: 20,
        m: 200,
        k: vec![20],
        delta: vec![0.5],
        l: vec![3],
        t: vec![40],
        t_inner: vec![10],
        noise_var: 0.2,
        monte_carlo: 20,
        eta: EtaChoice::Scaled,
        c0: 1.5,
        ..ExperimentSpec::default()
    };
    let recs = run_experiment(&spec).map_err(|e| e.to_string())?;
    let ours = mean_rows(&recs, Method::Ours, Metric::PcrPrediction)[0].error;
    let oracle = mean_rows(&recs, Method::Oracle, Metric::PcrPrediction)[0].error;
    fail_if(ours > 1.05 * oracle, format!("ours {ours:.4e} > 1.05 x oracle {oracle:.4e}"))?;
    Ok(format!(
        "normal equations rel. diff {worst:.1e}; prediction error ours {ours:.4e} / oracle {oracle:.4e} = {:.4}",
        ours / oracle
    ))
}

fn criterion10() -> Check {
    let d = 10;
    let n = 100_000;
    let ds = make_sim_instance(d, n, Link::Square, 0.2, 5, 6).unwrap();
    let beta = ds.truth.as_ref().unwrap().beta.clone().unwrap();
    let shards = shard(&ds, &balanced_sizes(n, 10), 7).unwrap();
    let mut cluster = spawn_sim_cluster(&shards, TransportKind::InMemory).map_err(|e| e.to_string())?;
    let cfg = SolverConfig {
        outer: 40,
        inner: 10,
        eta: EtaRule::Scaled { c0: 1.5 },
        ..SolverConfig::default()
    };
    let w = sim_fit(&mut cluster, &cfg).map_err(|e| e.to_string())?.top();
    let err = sign_corrected_l2(&w, &beta).map_err(|e| e.to_string())?;
    fail_if(err >= 0.1, format!("K=10 sign-corrected error {err:.4}"))?;

    // K = 1 against the pooled Stein matrix built here
    let small = make_sim_instance(d, 20_000, Link::Square, 0.2, 8, 9).unwrap();
    let rows = rows_of(&small.a);
    let y = small.y.as_ref().unwrap().as_slice();
    let nn = rows.len() as f64;
    let mut stein = vec![vec![0.0; d]; d];
    for (r, yi) in rows.iter().zip(y) {
        for i in 0..d {
            for j in 0..d {
                stein[i][j] += yi * (r[i] * r[j] - if i == j { 1.0 } else { 0.0 });
            }
        }
    }
    stein.iter_mut().flatten().for_each(|x| *x /= nn);
    let top = power_top(&stein, 5000);
    let one = shard(&small, &[small.n()], 10).unwrap();
    let mut single = spawn_sim_cluster(&one, TransportKind::InMemory).map_err(|e| e.to_string())?;
    let cfg = SolverConfig {
        outer: 100,
        inner: 1,
        ..SolverConfig::default()
    };
    let w1 = sim_fit(&mut single, &cfg).map_err(|e| e.to_string())?.top();
    let dist = sign_corrected_l2(&w1, &DenseVector::from(top)).map_err(|e| e.to_string())?;
    fail_if(dist > 1e-6, format!("K=1 differs from pooled Stein eigenvector by {dist:.3e}"))?;
    // library Stein matrix agrees with the explicit one
    let lib = stein_matrix(&small.a, small.y.as_ref().unwrap());
    let dev = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).fold(0.0f64, |m, (i, j)| m.max((lib[(i, j)] - stein[i][j]).abs()));
    fail_if(dev > 1e-10, format!("Stein matrix mismatch {dev:.3e}"))?;
    Ok(format!("K=10 error {err:.4}; K=1 vs pooled {dist:.1e}"))
}

fn criterion11() -> Check {
    let d = 13;
    let (_, shards) = gaussian_instance(d, 300, 3, 1.0, 1100);
    let cfg = SolverConfig {
        outer: 3,
        inner: 4,
        ..SolverConfig::default()
    };
    let mut results = Vec::new();
    for transport in [TransportKind::InMemory, TransportKind::TcpLoopback] {
        let mut cluster = Cluster::spawn(&shards, Operator::Covariance, transport).map_err(|e| e.to_string())?;
        cluster.reset_ledger();
        results.push(top_eigenvector(&mut cluster, &cfg).map_err(|e| e.to_string())?);
    }
    let ledger = &results[0].ledger;
    for (k, w) in ledger.workers.iter().enumerate() {
        fail_if(w.uplink_gradient_bytes != 1248, format!("worker {k}: {} gradient bytes", w.uplink_gradient_bytes))?;
        fail_if(w.downlink_payload_bytes == 0, format!("worker {k}: no broadcast traffic itemized"))?;
    }
    fail_if(ledger.workers[0].uplink_other_bytes == 0, "worker 0 other uplink not itemized")?;
    fail_if(results[0].ledger != results[1].ledger, "memory and tcp ledgers differ")?;
    let same_bits = results[0].v.as_slice().iter().zip(results[1].v.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits());
    fail_if(!same_bits, "memory and tcp results differ")?;
    Ok(format!(
        "1248 gradient bytes per worker; worker 0 other uplink {} B, downlink {} B; tcp ledger and bits identical",
        ledger.workers[0].uplink_other_bytes, ledger.workers[0].downlink_payload_bytes
    ))
}

fn criterion12() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut a = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let v: f64 = rng.random_range(-1.0..1.0);
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let m = DenseMatrix::from_rows(&[&a[0], &a[1], &a[2]]);
        let jac = sym_eigendecompose(&m).map_err(|e| e.to_string())?.values;
        let cub = cubic_eigenvalues(&a);
        for (x, y) in jac.iter().zip(&cub) {
            worst = worst.max((x - y).abs());
        }
    }
    fail_if(worst > 1e-10, format!("max deviation {worst:.3e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("log-error decay in T", criterion1),
        ("K=1 exactness", criterion2),
        ("inner-loop contraction", criterion3),
        ("variance capture", criterion4),
        ("eigengap sweep", criterion5),
        ("machines sweep, skewed data", criterion6),
        ("DC/oracle sanity", criterion7),
        ("deflation invariants", criterion8),
        ("PCR", criterion9),
        ("single-index model", criterion10),
        ("communication accounting", criterion11),
        ("Jacobi vs cubic roots", criterion12),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} ({name}): {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} ({name}): {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
