use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::knn::knn_predict;
use super::metrics::{macro_auc, macro_metrics, AucMode, ConfusionMatrix};
use crate::data::{make_splits, one_hot, one_hot_masked, ExpressionDataset, Split, SplitPlan};
use crate::error::{Error, Result};
use crate::reduction::{build_regularizer, fit_with_regularizer, SolverConfig};

/// How held-out rows reach the reduced space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Fit on training rows only and project test rows through the learned map.
    #[default]
    Inductive,
    /// Fit on all rows with test labels hidden.
    Transductive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub dims: Vec<usize>,
    pub plan: SplitPlan,
    pub k_neighbors: usize,
    pub mode: EvalMode,
    pub auc_mode: AucMode,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            dims: default_dims(),
            plan: SplitPlan::default(),
            k_neighbors: 5,
            mode: EvalMode::Inductive,
            auc_mode: AucMode::Hard,
        }
    }
}

/// 100, 95, ..., 5, 1.
pub fn default_dims() -> Vec<usize> {
    let mut d: Vec<usize> = (1..=20).rev().map(|i| i * 5).collect();
    d.push(1);
    d
}

/// The default dimensions that fit a problem with at most `max_k` components.
pub fn feasible_default_dims(max_k: usize) -> Vec<usize> {
    default_dims().into_iter().filter(|&k| k <= max_k).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub acc: f64,
    pub macro_rec: f64,
    pub macro_pre: f64,
    pub macro_f1: f64,
    pub macro_auc: f64,
}

impl Scores {
    fn mean(items: &[Scores]) -> Scores {
        let n = items.len() as f64;
        let avg = |f: fn(&Scores) -> f64| items.iter().map(f).sum::<f64>() / n;
        Scores {
            acc: avg(|s| s.acc),
            macro_rec: avg(|s| s.macro_rec),
            macro_pre: avg(|s| s.macro_pre),
            macro_f1: avg(|s| s.macro_f1),
            macro_auc: avg(|s| s.macro_auc),
        }
    }

    pub fn values(&self) -> [f64; 5] {
        [self.acc, self.macro_rec, self.macro_pre, self.macro_f1, self.macro_auc]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionResult {
    pub k: usize,
    #[serde(flatten)]
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub repetition: usize,
    pub k: usize,
    #[serde(flatten)]
    pub scores: Scores,
    pub confusion: ConfusionMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub undefined: Vec<String>,
}

/// Metrics per dimension (averaged over repetitions), their mean over
/// dimensions, and every (repetition, k) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub dims: Vec<usize>,
    pub per_dimension: Vec<DimensionResult>,
    pub means: Scores,
    pub cells: Vec<CellResult>,
}

pub const TABLE_HEADER: &str = "Method,Mean ACC,Mean Macro-REC,Mean Macro-PRE,Mean Macro-F1,Macro-AUC";

impl EvalReport {
    /// One table row, four decimals.
    pub fn table_row(&self) -> String {
        let v = self.means.values();
        format!("{},{:.4},{:.4},{:.4},{:.4},{:.4}", self.method, v[0], v[1], v[2], v[3], v[4])
    }

    /// `k,acc,macro_rec,macro_pre,macro_f1,macro_auc`, one row per dimension.
    pub fn curve_csv(&self) -> String {
        let mut s = String::from("k,acc,macro_rec,macro_pre,macro_f1,macro_auc\n");
        for d in &self.per_dimension {
            let v = d.scores.values();
            s.push_str(&format!("{},{},{},{},{},{}\n", d.k, v[0], v[1], v[2], v[3], v[4]));
        }
        s
    }
}

/// Side-by-side summary table of several reports.
pub fn table_csv(reports: &[EvalReport]) -> String {
    let mut s = format!("{TABLE_HEADER}\n");
    for r in reports {
        s.push_str(&r.table_row());
        s.push('\n');
    }
    s
}

/// Evaluates `template` at every dimension in `opts.dims` over the repeated
/// splits of `opts.plan`. Cells run in parallel; results do not depend on
/// the thread count.
pub fn sweep_dimensions(
    ds: &ExpressionDataset,
    template: &SolverConfig,
    opts: &SweepOptions,
) -> Result<EvalReport> {
    if opts.dims.is_empty() {
        return Err(Error::Config("no dimensions to sweep".into()));
    }
    let splits = make_splits(ds.labels(), &opts.plan)?;
    let min_train = splits.iter().map(|s| s.train.len()).min().unwrap_or(0);
    let fit_rows = match opts.mode {
        EvalMode::Inductive => min_train,
        EvalMode::Transductive => ds.n_samples(),
    };
    let max_k = fit_rows.min(ds.n_features());
    if let Some(&bad) = opts.dims.iter().find(|&&k| k == 0 || k > max_k) {
        return Err(Error::Config(format!("dimension {bad} outside [1, {max_k}]")));
    }
    if opts.k_neighbors == 0 || opts.k_neighbors > min_train {
        return Err(Error::Config(format!(
            "k_neighbors = {} outside [1, {min_train}]",
            opts.k_neighbors
        )));
    }

    // the graph term depends on the rows only, not on k
    let regs: Vec<Option<DMatrix<f64>>> = splits
        .par_iter()
        .enumerate()
        .map(|(rep, split)| {
            let x = match opts.mode {
                EvalMode::Inductive => ds.x().select_rows(split.train.iter()),
                EvalMode::Transductive => ds.x().clone(),
            };
            build_regularizer(&x, template).map_err(|e| cell_error(rep, 0, e))
        })
        .collect::<Result<_>>()?;

    let grid: Vec<(usize, usize)> = (0..splits.len())
        .flat_map(|r| opts.dims.iter().map(move |&k| (r, k)))
        .collect();
    let cells: Vec<CellResult> = grid
        .par_iter()
        .map(|&(rep, k)| {
            run_cell(ds, template, opts, &splits[rep], regs[rep].as_ref(), k)
                .map(|mut c| {
                    c.repetition = rep;
                    c
                })
                .map_err(|e| cell_error(rep, k, e))
        })
        .collect::<Result<_>>()?;

    let per_dimension: Vec<DimensionResult> = opts
        .dims
        .iter()
        .map(|&k| {
            let at_k: Vec<Scores> = cells.iter().filter(|c| c.k == k).map(|c| c.scores).collect();
            DimensionResult {
                k,
                scores: Scores::mean(&at_k),
            }
        })
        .collect();
    let means = Scores::mean(&per_dimension.iter().map(|d| d.scores).collect::<Vec<_>>());
    Ok(EvalReport {
        method: template.method.name().to_string(),
        dims: opts.dims.clone(),
        per_dimension,
        means,
        cells,
    })
}

fn cell_error(repetition: usize, k: usize, e: Error) -> Error {
    match e {
        Error::Cell { .. } => e,
        other => Error::Cell {
            repetition,
            k,
            source: Box::new(other),
        },
    }
}

fn run_cell(
    ds: &ExpressionDataset,
    template: &SolverConfig,
    opts: &SweepOptions,
    split: &Split,
    reg: Option<&DMatrix<f64>>,
    k: usize,
) -> Result<CellResult> {
    let cfg = SolverConfig {
        k,
        ..template.clone()
    };
    let c = ds.n_classes();
    let (train_x, train_y) = ds.select_rows(&split.train);
    let (test_x, test_y) = ds.select_rows(&split.test);

    let (train_scores, test_scores, model) = match opts.mode {
        EvalMode::Inductive => {
            let y = if cfg.method.supervised() {
                Some(one_hot(&train_y, c)?)
            } else {
                None
            };
            let model = fit_with_regularizer(&train_x, y.as_ref(), &cfg, reg)?;
            (model.transform(&train_x)?, model.transform(&test_x)?, model)
        }
        EvalMode::Transductive => {
            let y = if cfg.method.supervised() {
                let mut known = vec![false; ds.n_samples()];
                for &i in &split.train {
                    known[i] = true;
                }
                Some(one_hot_masked(ds.labels(), c, &known)?)
            } else {
                None
            };
            let model = fit_with_regularizer(ds.x(), y.as_ref(), &cfg, reg)?;
            (model.transform(&train_x)?, model.transform(&test_x)?, model)
        }
    };

    let pred = knn_predict(&train_scores, &train_y, &test_scores, opts.k_neighbors, c)?;
    let confusion = ConfusionMatrix::from_predictions(&test_y, &pred.labels, c)?;
    let m = macro_metrics(&confusion)?;
    let auc_input = match opts.auc_mode {
        AucMode::Score => pred.votes.clone(),
        AucMode::Hard => {
            DMatrix::from_fn(pred.labels.len(), c, |i, j| if pred.labels[i] == j { 1.0 } else { 0.0 })
        }
    };
    let auc = macro_auc(&auc_input, &test_y, opts.auc_mode)?;
    let mut undefined = m.undefined;
    undefined.extend(auc.undefined);
    Ok(CellResult {
        repetition: 0,
        k,
        scores: Scores {
            acc: m.acc,
            macro_rec: m.macro_rec,
            macro_pre: m.macro_pre,
            macro_f1: m.macro_f1,
            macro_auc: auc.macro_auc,
        },
        confusion,
        iterations: model.iterations_run,
        converged: model.converged,
        undefined,
    })
}
