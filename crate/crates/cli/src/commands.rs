use std::fs;
use std::path::Path;

use plpca::data::{
    ingest_csv, make_splits, one_hot, synth_outliers, write_csv, ExpressionDataset, IngestOptions,
};
use plpca::eval::{
    bench_table_csv, feasible_default_dims, knn_predict, outlier_benchmark, rs_scores, sweep_dimensions,
    table_csv, EvalReport, SweepOptions, TABLE_HEADER,
};
use plpca::io::write_atomic;
use plpca::reduction::{fit, Method, SolverConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

fn load_dataset(cfg: &RunConfig) -> CliResult<ExpressionDataset> {
    let ds = match &cfg.dataset.path {
        Some(path) => ingest_csv(
            path,
            &IngestOptions {
                orientation: cfg.dataset.orientation,
                header: cfg.dataset.header,
                labels: cfg.dataset.labels.clone(),
            },
        )?,
        None => synth_outliers(&cfg.synth)?,
    };
    Ok(ds.normalize(cfg.dataset.normalization))
}

fn sweep_options(cfg: &RunConfig, dims: Vec<usize>) -> SweepOptions {
    SweepOptions {
        dims,
        plan: cfg.plan.clone(),
        k_neighbors: cfg.k_neighbors,
        mode: cfg.mode,
        auc_mode: cfg.auc_mode,
    }
}

fn with_method(cfg: &RunConfig, method: Method) -> SolverConfig {
    SolverConfig {
        method,
        ..cfg.solver.clone()
    }
}

struct Output<'a> {
    dir: &'a Path,
}

impl<'a> Output<'a> {
    fn create(dir: &'a Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        Ok(Self { dir })
    }

    fn text(&self, name: &str, contents: &str) -> CliResult<()> {
        Ok(write_atomic(&self.dir.join(name), contents.as_bytes())?)
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(plpca::Error::from)?;
        s.push('\n');
        self.text(name, &s)
    }

    fn config(&self, cfg: &RunConfig) -> CliResult<()> {
        self.text("config.json", &cfg.to_json())
    }
}

pub fn reduce(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let ds = load_dataset(cfg)?;
    let y = if cfg.solver.method.supervised() {
        Some(one_hot(ds.labels(), ds.n_classes())?)
    } else {
        None
    };
    eprintln!("reduce: {} k={}", cfg.solver.method, cfg.solver.k);
    let model = fit(&ds, y.as_ref(), &cfg.solver)?;
    let scores = model.transform(ds.x())?;
    let out = Output::create(out)?;
    model.save(out.dir, &cfg.solver)?;
    out.text("scores.csv", &plpca::io::matrix_to_csv(&scores))?;
    out.config(cfg)
}

pub fn evaluate(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let ds = load_dataset(cfg)?;
    let opts = sweep_options(cfg, cfg.dims.clone());
    let mut reports = Vec::new();
    for method in cfg.methods_or_solver() {
        eprintln!("evaluate: {method}");
        reports.push(sweep_dimensions(&ds, &with_method(cfg, method), &opts)?);
    }
    let out = Output::create(out)?;
    write_reports(&out, &reports)?;
    out.text("table.csv", &table_csv(&reports))?;
    out.config(cfg)
}

fn write_reports(out: &Output, reports: &[EvalReport]) -> CliResult<()> {
    for r in reports {
        out.json(&format!("report_{}.json", r.method), r)?;
        out.text(&format!("curve_{}.csv", r.method), &r.curve_csv())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct GridRow {
    alpha: f64,
    beta: f64,
    gamma: f64,
    p: usize,
    zeta: Vec<f64>,
    means: Option<[f64; 5]>,
    error: Option<String>,
}

fn grid_cells(cfg: &RunConfig) -> CliResult<Vec<SolverConfig>> {
    let s = &cfg.solver;
    let or = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
    let alphas = or(&cfg.grid.alpha, s.alpha);
    let betas = or(&cfg.grid.beta, s.beta);
    let gammas = or(&cfg.grid.gamma, s.gamma);
    let ps = if cfg.grid.p.is_empty() {
        vec![s.graph.p]
    } else {
        cfg.grid.p.clone()
    };
    let zetas = if cfg.grid.zeta.is_empty() {
        vec![s.graph.zeta.clone()]
    } else {
        cfg.grid.zeta.clone()
    };
    for v in alphas.iter().chain(&betas).chain(&gammas) {
        if !v.is_finite() {
            return Err(CliError::Config(format!("grid value {v} is not finite")));
        }
    }
    let mut cells = Vec::new();
    for &alpha in &alphas {
        for &beta in &betas {
            for &gamma in &gammas {
                for &p in &ps {
                    for zeta in &zetas {
                        if !zeta.is_empty() && zeta.len() != p {
                            return Err(CliError::Config(format!(
                                "zeta pattern {zeta:?} has {} weights but p = {p}",
                                zeta.len()
                            )));
                        }
                        let mut c = SolverConfig {
                            alpha,
                            beta,
                            gamma,
                            ..s.clone()
                        };
                        c.graph.p = p;
                        c.graph.zeta = zeta.clone();
                        cells.push(c);
                    }
                }
            }
        }
    }
    Ok(cells)
}

/// Best first by Mean ACC, then Mean Macro-F1; failed cells last.
fn rank(rows: &[GridRow]) -> Vec<usize> {
    let key = |r: &GridRow| r.means.map(|m| (m[0], m[3]));
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| match (key(&rows[a]), key(&rows[b])) {
        (Some(x), Some(y)) => y.0.total_cmp(&x.0).then(y.1.total_cmp(&x.1)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    order
}

pub fn gridsearch(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let ds = load_dataset(cfg)?;
    let cells = grid_cells(cfg)?;
    let opts = sweep_options(cfg, cfg.dims.clone());
    eprintln!("gridsearch: {} cells of {}", cells.len(), cfg.solver.method);
    let rows: Vec<GridRow> = cells
        .par_iter()
        .map(|c| {
            let res = sweep_dimensions(&ds, c, &opts);
            GridRow {
                alpha: c.alpha,
                beta: c.beta,
                gamma: c.gamma,
                p: c.graph.p,
                zeta: c.graph.zeta.clone(),
                means: res.as_ref().ok().map(|r| r.means.values()),
                error: res.err().map(|e| e.to_string()),
            }
        })
        .collect();

    let mut csv = format!("rank,alpha,beta,gamma,p,zeta,{},error\n", &TABLE_HEADER["Method,".len()..]);
    for (pos, &i) in rank(&rows).iter().enumerate() {
        let r = &rows[i];
        let zeta: Vec<String> = r.zeta.iter().map(f64::to_string).collect();
        let means = r.means.unwrap_or([f64::NAN; 5]);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{}\n",
            pos + 1,
            r.alpha,
            r.beta,
            r.gamma,
            r.p,
            zeta.join(";"),
            means[0],
            means[1],
            means[2],
            means[3],
            means[4],
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        ));
    }
    let out = Output::create(out)?;
    out.text("grid.csv", &csv)?;
    out.json("grid.json", &rows)?;
    out.config(cfg)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return Err(CliError::Partial {
            failed,
            total: rows.len(),
        });
    }
    Ok(())
}

pub fn bench_outliers(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let methods: Vec<SolverConfig> = if cfg.methods.is_empty() {
        Method::ALL.iter().map(|&m| with_method(cfg, m)).collect()
    } else {
        cfg.methods.iter().map(|&m| with_method(cfg, m)).collect()
    };
    let dims = if cfg.bench.dims.is_empty() {
        feasible_default_dims(cfg.synth.dims)
    } else {
        cfg.bench.dims.clone()
    };
    eprintln!("bench-outliers: {} methods, outliers {:?}", methods.len(), cfg.bench.outliers);
    let rows = outlier_benchmark(
        &cfg.synth,
        &cfg.bench.outliers,
        &methods,
        &sweep_options(cfg, dims),
        cfg.dataset.normalization,
    )?;
    let out = Output::create(out)?;
    out.text("bench.csv", &bench_table_csv(&rows))?;
    out.json("bench.json", &rows)?;
    out.config(cfg)
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

/// R-S data for the first split: fit on the training rows at `rs_k`,
/// classify the test rows and score them against their true classes.
pub fn rs(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let ds = load_dataset(cfg)?;
    let split = make_splits(ds.labels(), &cfg.plan)?.swap_remove(0);
    let (train_x, train_y) = ds.select_rows(&split.train);
    let (test_x, test_y) = ds.select_rows(&split.test);
    let test_ids: Vec<String> = split.test.iter().map(|&i| ds.sample_ids()[i].clone()).collect();
    let c = ds.n_classes();
    let mut files = Vec::new();
    for method in cfg.methods_or_solver() {
        eprintln!("rs: {method} k={}", cfg.rs_k);
        let solver = SolverConfig {
            k: cfg.rs_k,
            ..with_method(cfg, method)
        };
        let train = ExpressionDataset::from_matrix(train_x.clone(), train_y.clone())?;
        let y = if method.supervised() {
            Some(one_hot(&train_y, c)?)
        } else {
            None
        };
        let model = fit(&train, y.as_ref(), &solver)?;
        let train_scores = model.transform(&train_x)?;
        let test_scores = model.transform(&test_x)?;
        let pred = knn_predict(&train_scores, &train_y, &test_scores, cfg.k_neighbors, c)?;
        let scores = rs_scores(&test_scores, &test_y, &pred.labels)?;
        files.push((format!("rs_{method}.csv"), scores.to_csv(&test_ids)));
        let all = scores.to_csv(&test_ids);
        let mut lines = all.lines();
        let header = lines.next().unwrap_or_default().to_string();
        let body: Vec<&str> = lines.collect();
        for (class, name) in ds.class_names().iter().enumerate() {
            let mut s = format!("{header}\n");
            for (row, line) in body.iter().enumerate() {
                if test_y[row] == class {
                    s.push_str(line);
                    s.push('\n');
                }
            }
            files.push((format!("rs_{method}_{}.csv", file_safe(name)), s));
        }
    }
    let out = Output::create(out)?;
    for (name, contents) in &files {
        out.text(name, contents)?;
    }
    out.config(cfg)
}

pub fn synth(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let ds = synth_outliers(&cfg.synth)?;
    let out = Output::create(out)?;
    write_csv(
        &ds,
        &out.dir.join("data.csv"),
        &out.dir.join("labels.csv"),
        cfg.dataset.orientation,
    )?;
    out.config(cfg)
}
