//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! test fails if any check fails.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use plpca::data::{one_hot, Normalization, OutlierSpec};
use plpca::eval::{
    feasible_default_dims, knn_predict, macro_metrics, outlier_benchmark, ConfusionMatrix, SweepOptions,
};
use plpca::graph::{build_knn_graph, Bandwidth};
use plpca::persistence::{
    boundary_matrix, build_complex_vr, combinatorial_laplacian, edge_set, filtered_family,
    harmonic_spectrum, persistent_laplacian_q, FilterDirection, SimplicialComplex,
};
use plpca::reduction::{fit_matrix, fit_with_regularizer, Method, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Check = Result<String, String>;

// ---------- exact integer oracles ----------

/// Fraction-free (Bareiss) elimination rank over the integers.
fn rank_i128(rows: usize, cols: usize, at: impl Fn(usize, usize) -> i64) -> usize {
    let mut a: Vec<Vec<i128>> = (0..rows).map(|r| (0..cols).map(|c| at(r, c) as i128).collect()).collect();
    let mut rank = 0;
    let mut prev: i128 = 1;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for j in c + 1..cols {
                let num = a[r][j] * a[rank][c] - a[r][c] * a[rank][j];
                assert_eq!(num % prev, 0, "Bareiss division must be exact");
                a[r][j] = num / prev;
            }
            a[r][c] = 0;
        }
        prev = a[rank][c];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// `∂_q` built directly from the sorted simplex lists.
fn boundary_oracle(k: &SimplicialComplex, q: usize) -> Vec<Vec<i64>> {
    let cols = k.simplices(q);
    if q == 0 {
        return Vec::new();
    }
    let faces = k.simplices(q - 1);
    let mut b = vec![vec![0i64; cols.len()]; faces.len()];
    for (c, s) in cols.iter().enumerate() {
        for i in 0..s.len() {
            let face: Vec<usize> = s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
            let r = faces.binary_search(&face).expect("faces present");
            b[r][c] = if i % 2 == 0 { 1 } else { -1 };
        }
    }
    b
}

fn rank_of(b: &[Vec<i64>], keep_rows: &[usize]) -> usize {
    let cols = b.first().map_or(0, Vec::len);
    rank_i128(keep_rows.len(), cols, |r, c| b[keep_rows[r]][c])
}

fn all_rows(b: &[Vec<i64>]) -> Vec<usize> {
    (0..b.len()).collect()
}

fn betti_oracle(k: &SimplicialComplex, q: usize) -> usize {
    let bq = boundary_oracle(k, q);
    let bq1 = boundary_oracle(k, q + 1);
    k.count(q) - rank_of(&bq, &all_rows(&bq)) - rank_of(&bq1, &all_rows(&bq1))
}

/// dim ker ∂_q(small) − dim(im ∂_{q+1}(large) ∩ C_q(small)).
fn persistent_betti_oracle(small: &SimplicialComplex, large: &SimplicialComplex, q: usize) -> usize {
    let bq = boundary_oracle(small, q);
    let ker = small.count(q) - rank_of(&bq, &all_rows(&bq));
    let up = boundary_oracle(large, q + 1);
    let outside: Vec<usize> = (0..large.count(q))
        .filter(|&r| !small.contains(&large.simplices(q)[r]))
        .collect();
    let inter = rank_of(&up, &all_rows(&up)) - rank_of(&up, &outside);
    ker - inter
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, _| rng.gen_range(0.0..1.0))
}

fn random_complexes(seed: u64, count: usize) -> Vec<SimplicialComplex> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(3..=8);
            let d = rng.gen_range(2..=3);
            let pts = random_points(&mut rng, n, d);
            build_complex_vr(&pts, rng.gen_range(0.1..1.2), 2)
        })
        .collect()
}

fn random_pairs(seed: u64, count: usize) -> Vec<(SimplicialComplex, SimplicialComplex)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(3..=8);
            let pts = random_points(&mut rng, n, 2);
            let e1 = rng.gen_range(0.1..0.9);
            let e2 = e1 + rng.gen_range(0.0..0.6);
            (build_complex_vr(&pts, e1, 2), build_complex_vr(&pts, e2, 2))
        })
        .collect()
}

// ---------- checks ----------

fn c1_topology_oracle() -> Check {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let complexes = random_complexes(101, 200);
    for (i, k) in complexes.iter().enumerate() {
        for q in 0..=2 {
            let (_, zeros) = harmonic_spectrum(combinatorial_laplacian(k, q));
            let beta = betti_oracle(k, q);
            if zeros != beta {
                mismatches.push(format!("complex {i} q={q}: {zeros} zeros vs beta {beta}"));
            }
        }
    }
    let t = start.elapsed();
    if !mismatches.is_empty() {
        return Err(format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]));
    }
    if t > Duration::from_secs(30) {
        return Err(format!("took {t:.1?}"));
    }
    Ok(format!("200 complexes, 0 mismatches, {t:.1?}"))
}

fn c2_persistent_betti() -> Check {
    let start = Instant::now();
    let mut checked = 0;
    for (i, (small, large)) in random_pairs(202, 100).iter().enumerate() {
        for q in 0..=2 {
            let got = persistent_laplacian_q(small, large, q).map_err(|e| e.to_string())?.betti;
            let want = persistent_betti_oracle(small, large, q);
            if got != want {
                return Err(format!("pair {i} q={q}: harmonic multiplicity {got}, oracle {want}"));
            }
            checked += 1;
        }
    }
    let t = start.elapsed();
    if t > Duration::from_secs(60) {
        return Err(format!("took {t:.1?}"));
    }
    Ok(format!("{checked} (pair, q) cases exact, {t:.1?}"))
}

fn c3_chain_complex() -> Check {
    let mut all = random_complexes(101, 200);
    for (s, l) in random_pairs(202, 100) {
        all.push(s);
        all.push(l);
    }
    let mut products = 0;
    for (i, k) in all.iter().enumerate() {
        for q in 1..=k.dim() {
            let b = boundary_matrix(k, q);
            let b1 = boundary_matrix(k, q + 1);
            if b.ncols() != b1.nrows() {
                return Err(format!("complex {i} q={q}: shape mismatch"));
            }
            if (&b * &b1).iter().any(|&v| v != 0) {
                return Err(format!("complex {i}: B_{q} B_{} != 0", q + 1));
            }
            products += 1;
        }
    }
    Ok(format!("{products} products over {} complexes are exactly zero", all.len()))
}

fn c4_solver_contract() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut fits = 0;
    for inst in 0..50 {
        let n = rng.gen_range(8..=40);
        let m = rng.gen_range(3..=60);
        let k = rng.gen_range(1..=8usize.min(n).min(m));
        let c = rng.gen_range(2..=4usize);
        let x = DMatrix::from_fn(n, m, |_, _| rng.gen_range(0.0..1.0));
        let mut labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        for (i, l) in labels.iter_mut().take(c).enumerate() {
            *l = i;
        }
        let y = one_hot(&labels, c).map_err(|e| e.to_string())?;
        let gamma = 10f64.powi(rng.gen_range(-4..=1));
        for method in Method::ALL {
            let cfg = SolverConfig {
                gamma,
                ..SolverConfig::new(method, k)
            };
            let model = fit_matrix(&x, Some(&y), &cfg)
                .map_err(|e| format!("instance {inst} {method} n={n} m={m} k={k}: {e}"))?;
            let dev = (model.q.transpose() * &model.q - DMatrix::identity(k, k)).amax();
            if dev > 1e-8 {
                return Err(format!("instance {inst} {method}: |QᵀQ - I| = {dev:e}"));
            }
            for w in model.objective_trace.windows(2) {
                if w[1] > w[0] + 1e-10 * w[0].abs() {
                    return Err(format!("instance {inst} {method}: objective {} -> {}", w[0], w[1]));
                }
            }
            fits += 1;
        }
    }
    Ok(format!("{fits} fits orthonormal and monotone"))
}

/// Sine of the largest principal angle between two orthonormal bases.
fn max_angle_sin(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let resid = b - a * (a.transpose() * b);
    resid.singular_values().max()
}

fn c5_reduction_limits() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    for inst in 0..20 {
        let n = rng.gen_range(12..=40);
        let m = rng.gen_range(4..=30);
        let k = rng.gen_range(1..=4usize.min(m));
        let x = DMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
        let fit = |method| {
            let cfg = SolverConfig {
                gamma: 0.0,
                ..SolverConfig::new(method, k)
            };
            fit_matrix(&x, None, &cfg).map(|m| m.q)
        };
        let pca = fit(Method::Pca).map_err(|e| e.to_string())?;
        for method in [Method::PlpcaSimple, Method::Glpca] {
            let q = fit(method).map_err(|e| e.to_string())?;
            let s = max_angle_sin(&pca, &q);
            worst = worst.max(s.asin());
            if s.asin() >= 1e-6 {
                return Err(format!("instance {inst} {method}: angle {:e}", s.asin()));
            }
        }
    }
    Ok(format!("largest principal angle {worst:.2e}"))
}

fn binarized(adjacency: &DMatrix<f64>) -> DMatrix<f64> {
    let n = adjacency.nrows();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j && adjacency[(i, j)] > 0.0 {
                l[(i, j)] = -1.0;
                l[(i, i)] += 1.0;
            }
        }
    }
    l
}

fn c6_single_filtration() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for inst in 0..10 {
        let n = rng.gen_range(15..=35);
        let m = rng.gen_range(4..=20);
        let k = rng.gen_range(1..=4);
        let x = DMatrix::from_fn(n, m, |_, _| rng.gen_range(0.0..1.0));
        let mut cfg = SolverConfig::new(Method::PlpcaSimple, k);
        cfg.gamma = 10f64.powi(rng.gen_range(-2..=1));
        cfg.graph.p = 1;
        cfg.graph.zeta = vec![1.0];
        let persistent = fit_matrix(&x, None, &cfg).map_err(|e| e.to_string())?;
        let graph = build_knn_graph(&x, cfg.graph.knn_k, cfg.graph.eta).map_err(|e| e.to_string())?;
        let l1 = binarized(&graph.adjacency);
        let glpca_cfg = SolverConfig {
            method: Method::Glpca,
            ..cfg.clone()
        };
        let glpca = fit_with_regularizer(&x, None, &glpca_cfg, Some(&l1)).map_err(|e| e.to_string())?;
        let a = *persistent.objective_trace.last().unwrap();
        let b = *glpca.objective_trace.last().unwrap();
        let diff = (a - b).abs();
        worst = worst.max(diff);
        if diff > 1e-8 {
            return Err(format!("instance {inst}: objectives {a} vs {b}"));
        }
    }
    Ok(format!("10 instances, largest objective gap {worst:.1e}"))
}

fn c7_metrics_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for inst in 0..1000 {
        let c = rng.gen_range(2..=6);
        let mut truth = Vec::new();
        let mut pred = Vec::new();
        for t in 0..c {
            for p in 0..c {
                for _ in 0..rng.gen_range(0..=6) {
                    truth.push(t);
                    pred.push(p);
                }
            }
        }
        if truth.is_empty() {
            truth.push(0);
            pred.push(0);
        }
        let n = truth.len() as f64;
        let mut rec = 0.0;
        let mut pre = 0.0;
        for class in 0..c {
            let tp = (0..truth.len()).filter(|&i| truth[i] == class && pred[i] == class).count() as f64;
            let actual = truth.iter().filter(|&&t| t == class).count() as f64;
            let called = pred.iter().filter(|&&p| p == class).count() as f64;
            rec += if actual > 0.0 { tp / actual } else { 0.0 };
            pre += if called > 0.0 { tp / called } else { 0.0 };
        }
        rec /= c as f64;
        pre /= c as f64;
        let f1 = if rec + pre > 0.0 { 2.0 * pre * rec / (pre + rec) } else { 0.0 };
        let acc = (0..truth.len()).filter(|&i| truth[i] == pred[i]).count() as f64 / n;

        let cm = ConfusionMatrix::from_predictions(&truth, &pred, c).map_err(|e| e.to_string())?;
        let m = macro_metrics(&cm).map_err(|e| e.to_string())?;
        for (name, got, want) in [
            ("acc", m.acc, acc),
            ("rec", m.macro_rec, rec),
            ("pre", m.macro_pre, pre),
            ("f1", m.macro_f1, f1),
        ] {
            if (got - want).abs() > 1e-12 {
                return Err(format!("matrix {inst}: {name} {got} vs oracle {want}"));
            }
        }
    }
    let cm = ConfusionMatrix {
        counts: vec![vec![1, 1], vec![0, 2]],
    };
    let f1 = macro_metrics(&cm).map_err(|e| e.to_string())?.macro_f1;
    if (f1 - 15.0 / 19.0).abs() > 1e-12 {
        return Err(format!("worked example F1 {f1}"));
    }
    Ok("1000 matrices within 1e-12; [[1,1],[0,2]] gives F1 = 15/19".into())
}

fn knn_oracle(train: &[Vec<i64>], labels: &[usize], query: &[i64], k: usize, c: usize) -> usize {
    let mut d: Vec<(i64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum(), i))
        .collect();
    d.sort();
    let mut votes = vec![0usize; c];
    let mut dist = vec![0.0f64; c];
    for &(d2, i) in &d[..k] {
        votes[labels[i]] += 1;
        dist[labels[i]] += (d2 as f64).sqrt();
    }
    let mut best = 0;
    for class in 1..c {
        let better = votes[class] > votes[best] || (votes[class] == votes[best] && dist[class] < dist[best]);
        if better {
            best = class;
        }
    }
    best
}

fn c8_knn_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut queries = 0;
    for inst in 0..500 {
        let n = rng.gen_range(1..=25);
        let d = rng.gen_range(1..=3);
        let c = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=n);
        let train: Vec<Vec<i64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let test: Vec<Vec<i64>> = (0..6).map(|_| (0..d).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        let to_m = |rows: &[Vec<i64>]| DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j] as f64);
        let pred = knn_predict(&to_m(&train), &labels, &to_m(&test), k, c).map_err(|e| e.to_string())?;
        for (t, q) in test.iter().enumerate() {
            let want = knn_oracle(&train, &labels, q, k, c);
            if pred.labels[t] != want {
                return Err(format!("instance {inst} query {t}: predicted {} vs oracle {want}", pred.labels[t]));
            }
            queries += 1;
        }
    }
    Ok(format!("500 instances, {queries} queries identical"))
}

fn c9_outlier_benchmark() -> Check {
    let start = Instant::now();
    let methods: Vec<SolverConfig> = Method::ALL.iter().map(|&m| SolverConfig::new(m, 1)).collect();
    let opts_for = |seed: u64| SweepOptions {
        dims: feasible_default_dims(OutlierSpec::default().dims),
        plan: plpca::data::SplitPlan {
            seed,
            ..Default::default()
        },
        ..SweepOptions::default()
    };
    let run = |seed: u64, counts: &[usize]| {
        let base = OutlierSpec {
            seed,
            ..OutlierSpec::default()
        };
        outlier_benchmark(&base, counts, &methods, &opts_for(seed), Normalization::Zscore)
            .map_err(|e| format!("seed {seed}: {e}"))
    };
    let f1 = |rows: &[plpca::eval::BenchRow], n: usize, m: &str| {
        rows.iter()
            .find(|r| r.n_outliers == n && r.report.method == m)
            .map(|r| r.report.means.macro_f1)
            .unwrap()
    };

    let fixed = run(0, &[2, 4, 8])?;
    let mut accs = Vec::new();
    for n in [2, 4, 8] {
        let acc = fixed
            .iter()
            .find(|r| r.n_outliers == n && r.report.method == "PLPCA_FULL")
            .unwrap()
            .report
            .means
            .acc;
        accs.push(format!("{n}:{acc:.4}"));
        if acc < 0.97 {
            return Err(format!("PLPCA mean ACC {acc:.4} with {n} outliers"));
        }
    }
    let mut held = 0;
    let mut detail = Vec::new();
    for seed in 0..5u64 {
        let rows = if seed == 0 { fixed.clone() } else { run(seed, &[8])? };
        let ours = f1(&rows, 8, "PLPCA_FULL");
        let best_other = Method::ALL
            .iter()
            .filter(|&&m| m != Method::PlpcaFull)
            .map(|m| f1(&rows, 8, m.name()))
            .fold(f64::NEG_INFINITY, f64::max);
        if ours >= best_other {
            held += 1;
        }
        detail.push(format!("{ours:.4}/{best_other:.4}"));
    }
    let t = start.elapsed();
    let summary = format!(
        "ACC {}; 8-outlier F1 PLPCA/best-other per seed {}; ordering held {held}/5; {t:.0?}",
        accs.join(" "),
        detail.join(" ")
    );
    if held < 4 {
        return Err(summary);
    }
    if t > Duration::from_secs(300) {
        return Err(format!("too slow: {summary}"));
    }
    Ok(summary)
}

fn c10_filtration_semantics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for inst in 0..50 {
        let n = rng.gen_range(6..=30);
        let d = rng.gen_range(2..=4);
        let x = random_points(&mut rng, n, d);
        let graph = build_knn_graph(&x, rng.gen_range(2..=5), Bandwidth::Auto).map_err(|e| e.to_string())?;
        let p = rng.gen_range(1..=8);
        let eq = filtered_family(&graph.laplacian, p, FilterDirection::AsEquation).map_err(|e| e.to_string())?;
        if eq.members[p - 1].iter().any(|&v| v != 0.0) {
            return Err(format!("graph {inst}: as_equation L^p is not zero"));
        }
        let text = filtered_family(&graph.laplacian, p, FilterDirection::AsText).map_err(|e| e.to_string())?;
        for t in 1..p {
            let a = edge_set(&text.members[t - 1]);
            let b = edge_set(&text.members[t]);
            if !a.iter().all(|e| b.contains(e)) {
                return Err(format!("graph {inst}: edge sets not nested at t={t}"));
            }
        }
        if text.members[p - 1] != binarized(&graph.adjacency) {
            return Err(format!("graph {inst}: as_text L^p differs from the unweighted KNN Laplacian"));
        }
    }
    Ok("50 graphs exact in both modes".into())
}

fn plpca_cmd(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_plpca"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("plpca {args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn write_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn c11_reproducibility() -> Check {
    let tmp = TempDir::new().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let synth = write_file(
        root,
        "synth.toml",
        "[synth]\nn_per_class = 15\ndims = 8\nn_outliers = 4\nseparation = 6.0\nseed = 11\n",
    );
    let data = root.join("data");
    plpca_cmd(&["synth", "--config", synth.to_str().unwrap(), "--out", data.to_str().unwrap()])?;
    let run = write_file(
        root,
        "run.toml",
        &format!(
            "dims = [1, 3]\nk_neighbors = 3\nrs_k = 2\n\
             [dataset]\npath = \"{}\"\nlabels = {{ file = \"{}\" }}\n\
             [plan]\nrepetitions = 2\ntest_fraction = 0.25\nseed = 4\nstratified = true\n\
             [solver]\nmax_iter = 40\n[grid]\nbeta = [0.1, 0.5]\n\
             [bench]\noutliers = [2, 4]\ndims = [1, 2]\n\
             [synth]\nn_per_class = 12\ndims = 5\nn_outliers = 2\nseparation = 6.0\nseed = 3\n",
            data.join("data.csv").display(),
            data.join("labels.csv").display()
        ),
    );
    let mut compared = 0;
    for (cmd, extra) in [
        ("synth", vec![]),
        ("reduce", vec!["--method", "PLPCA_FULL"]),
        ("evaluate", vec!["--method", "PCA,LSDSPCA,PLPCA_FULL"]),
        ("gridsearch", vec!["--method", "RLSDSPCA"]),
        ("bench-outliers", vec!["--method", "PCA,PLPCA_FULL"]),
        ("rs", vec!["--method", "GLPCA,PLPCA_SIMPLE"]),
    ] {
        let a = root.join(format!("{cmd}-a"));
        let b = root.join(format!("{cmd}-b"));
        let mut args = vec![cmd, "--config", run.to_str().unwrap(), "--out", a.to_str().unwrap()];
        args.extend(extra);
        plpca_cmd(&args)?;
        let emitted = a.join("config.json");
        plpca_cmd(&[cmd, "--config", emitted.to_str().unwrap(), "--out", b.to_str().unwrap()])?;
        let (fa, fb) = (dir_bytes(&a), dir_bytes(&b));
        if fa.keys().ne(fb.keys()) {
            return Err(format!("{cmd}: different file sets"));
        }
        for (name, bytes) in &fa {
            if bytes != &fb[name] {
                return Err(format!("{cmd}: {name} differs"));
            }
            compared += 1;
        }
    }
    Ok(format!("6 commands, {compared} files byte-identical on rerun"))
}

/// Two imbalanced Gaussian classes with the COAD sample counts, written as a
/// genes × samples CSV plus a label file.
fn coad_shaped(dir: &Path, genes: usize) -> (PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    let counts = [19usize, 262];
    let mut cols: Vec<(String, usize, Vec<f64>)> = Vec::new();
    for (class, &count) in counts.iter().enumerate() {
        for s in 0..count {
            let shift = if class == 0 { 0.0 } else { 1.5 };
            let v = (0..genes)
                .map(|g| {
                    let signal = if g < 10 { shift } else { 0.0 };
                    signal + rng.gen_range(-1.0..1.0) + rng.gen_range(-1.0..1.0)
                })
                .collect();
            cols.push((format!("{}_{s}", if class == 0 { "normal" } else { "tumor" }), class, v));
        }
    }
    let mut data = String::from("gene_id");
    for (id, _, _) in &cols {
        data.push(',');
        data.push_str(id);
    }
    data.push('\n');
    for g in 0..genes {
        data.push_str(&format!("g{g}"));
        for (_, _, v) in &cols {
            data.push_str(&format!(",{}", v[g]));
        }
        data.push('\n');
    }
    let mut labels = String::from("sample_id,label\n");
    for (id, class, _) in &cols {
        labels.push_str(&format!("{id},{}\n", if *class == 0 { "normal" } else { "tumor" }));
    }
    (write_file(dir, "coad.csv", &data), write_file(dir, "coad_labels.csv", &labels))
}

fn c12_coad_pipeline() -> Check {
    let tmp = TempDir::new().map_err(|e| e.to_string())?;
    let supplied = std::env::var_os("PLPCA_COAD_DATA").map(PathBuf::from);
    let (data, labels, extra, source) = match supplied {
        Some(d) => {
            let l = std::env::var_os("PLPCA_COAD_LABELS")
                .map(PathBuf::from)
                .ok_or("PLPCA_COAD_LABELS must accompany PLPCA_COAD_DATA")?;
            (d, l, String::new(), "supplied TCGA data")
        }
        None => {
            let (d, l) = coad_shaped(tmp.path(), 120);
            (
                d,
                l,
                "dims = [100, 50, 10, 1]\n[plan]\nrepetitions = 2\ntest_fraction = 0.2\nseed = 0\nstratified = true\n"
                    .to_string(),
                "COAD-shaped stand-in (no TCGA data supplied)",
            )
        }
    };
    let cfg = write_file(
        tmp.path(),
        "coad.toml",
        &format!(
            "{extra}[dataset]\npath = \"{}\"\nlabels = {{ file = \"{}\" }}\n",
            data.display(),
            labels.display()
        ),
    );
    let out = tmp.path().join("out");
    plpca_cmd(&[
        "evaluate",
        "--preset",
        "coad-plpca",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])?;
    let table = fs::read_to_string(out.join("table.csv")).map_err(|e| e.to_string())?;
    let row = table.lines().nth(1).ok_or("table has no rows")?;
    let fields: Vec<&str> = row.split(',').collect();
    if fields.len() != 6 || fields[0] != "PLPCA_FULL" {
        return Err(format!("unexpected row {row:?}"));
    }
    let values: Vec<f64> = fields[1..].iter().map(|f| f.parse::<f64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(format!("metric out of range in {row:?}"));
    }
    Ok(format!(
        "{source}: Mean ACC {} (reference 0.9886, informational only)",
        fields[1]
    ))
}

#[test]
fn acceptance() {
    let checks: [(&str, fn() -> Check); 12] = [
        ("1 topology oracle equivalence", c1_topology_oracle),
        ("2 persistent Betti equivalence", c2_persistent_betti),
        ("3 chain-complex identity", c3_chain_complex),
        ("4 solver contract", c4_solver_contract),
        ("5 reduction limits", c5_reduction_limits),
        ("6 single-filtration consistency", c6_single_filtration),
        ("7 metrics oracle", c7_metrics_oracle),
        ("8 KNN oracle", c8_knn_oracle),
        ("9 outlier robustness", c9_outlier_benchmark),
        ("10 filtration semantics", c10_filtration_semantics),
        ("11 reproducibility", c11_reproducibility),
        ("12 COAD-shaped pipeline", c12_coad_pipeline),
    ];
    let only: Option<Vec<String>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').map(str::to_owned).collect());
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (name, check) in checks {
        let id = name.split(' ').next().unwrap();
        if only.as_ref().is_some_and(|o| !o.iter().any(|x| x == id)) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(msg) => writeln!(err, "criterion {name}: PASS ({msg})").unwrap(),
            Err(msg) => {
                writeln!(err, "criterion {name}: FAIL ({msg})").unwrap();
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
