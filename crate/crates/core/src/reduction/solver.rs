use nalgebra::{DMatrix, DVector};

use super::eigen::q_subproblem;
use super::objective::{center_rows, objective_terms};
use super::{GraphKind, ProjectionModel, SolverConfig, SolverState};
use crate::data::{ExpressionDataset, OneHotMatrix};
use crate::error::{Error, Result};
use crate::graph::build_knn_graph;
use crate::persistence::{aggregate_pl, filtered_family};

/// Floor applied to row and column norms before reweighting.
const REWEIGHT_FLOOR: f64 = 1e-10;
/// Allowed objective increase between iterations, relative to the problem scale.
const MONOTONE_SLACK: f64 = 1e-10;
/// Row weight of a row whose norm sits at the floor.
const PINNED_WEIGHT: f64 = 0.5 / REWEIGHT_FLOOR;
/// Feature residuals below this fraction of the column norm are held at zero.
const PIN_RELATIVE: f64 = 1e-7;

/// Graph regularizer for `cfg.method` built from the rows of `x`: the KNN
/// Laplacian, the aggregated persistent Laplacian, or `None` when the method
/// has no graph term or its weight is zero.
pub fn build_regularizer(x: &DMatrix<f64>, cfg: &SolverConfig) -> Result<Option<DMatrix<f64>>> {
    let (_, _, gamma) = cfg.effective_weights();
    if gamma == 0.0 {
        return Ok(None);
    }
    let g = &cfg.graph;
    let graph = build_knn_graph(x, g.knn_k, g.eta)?;
    match cfg.method.graph() {
        GraphKind::None => Ok(None),
        GraphKind::Weighted => Ok(Some(graph.laplacian)),
        GraphKind::Persistent => {
            let family = filtered_family(&graph.laplacian, g.p, g.direction)?;
            Ok(Some(aggregate_pl(family, &g.resolved_zeta())?.pl))
        }
    }
}

/// Fits `cfg.method` on a dataset. Supervised methods need `y`.
pub fn fit(ds: &ExpressionDataset, y: Option<&OneHotMatrix>, cfg: &SolverConfig) -> Result<ProjectionModel> {
    fit_matrix(ds.x(), y, cfg)
}

/// Fits on a raw samples × features matrix.
pub fn fit_matrix(x: &DMatrix<f64>, y: Option<&OneHotMatrix>, cfg: &SolverConfig) -> Result<ProjectionModel> {
    validate(x, y, cfg)?;
    let reg = build_regularizer(x, cfg)?;
    fit_with_regularizer(x, y, cfg, reg.as_ref())
}

/// Fits with a caller-supplied graph regularizer in place of the one the
/// configuration would build.
pub fn fit_with_regularizer(
    x: &DMatrix<f64>,
    y: Option<&OneHotMatrix>,
    cfg: &SolverConfig,
    regularizer: Option<&DMatrix<f64>>,
) -> Result<ProjectionModel> {
    validate(x, y, cfg)?;
    let (n, m) = x.shape();
    let k = cfg.k;
    let (alpha, beta, gamma) = cfg.effective_weights();
    if let Some(r) = regularizer {
        if r.shape() != (n, n) {
            return Err(Error::Shape(format!("regularizer is {}x{}, expected {n}x{n}", r.nrows(), r.ncols())));
        }
    } else if gamma != 0.0 {
        return Err(Error::Config("graph term has non-zero weight but no regularizer".into()));
    }

    let center = if cfg.center {
        x.row_mean().transpose()
    } else {
        DVector::zeros(m)
    };
    let xc = center_rows(x, &center);
    let y = if cfg.method.supervised() { y } else { None };

    // parts of M that do not change between iterations
    let mut fixed = DMatrix::zeros(n, n);
    if alpha != 0.0 {
        let ym = y.expect("validated").matrix();
        fixed -= ym.transpose() * ym * alpha;
    }
    if gamma != 0.0 {
        fixed += regularizer.expect("checked above") * gamma;
    }
    let robust = cfg.method.robust_loss();
    let scale = problem_scale(&xc, y, alpha, robust);

    let pin_weight: Vec<f64> = xc
        .column_iter()
        .map(|c| 0.5 / (PIN_RELATIVE * c.norm()).max(REWEIGHT_FLOOR))
        .collect();
    let mut h = DVector::from_element(m, 1.0);
    let mut g = DVector::from_element(n, 1.0);
    let mut trace = Vec::with_capacity(cfg.max_iter);
    let mut q_prev: Option<DMatrix<f64>> = None;
    let mut converged = false;
    let mut last = None;

    for iteration in 1..=cfg.max_iter {
        let pinned_cols: Vec<usize> = if robust {
            (0..m).filter(|&j| h[j] >= pin_weight[j]).collect()
        } else {
            Vec::new()
        };
        let free_rows: Vec<usize> = (0..n).filter(|&i| beta == 0.0 || g[i] < PINNED_WEIGHT).collect();
        let build = |skip: &[usize]| {
            let mut hw = h.clone();
            for &j in skip {
                hw[j] = 0.0;
            }
            let mut mq = fixed.clone();
            mq -= scale_columns(&xc, &hw) * xc.transpose();
            if beta != 0.0 {
                for i in 0..n {
                    mq[(i, i)] += beta * g[i];
                }
            }
            (&mq + mq.transpose()) * 0.5
        };
        let mq = build(&[]);
        let reduced = (!pinned_cols.is_empty()).then(|| build(&pinned_cols));
        let q = match q_step(reduced.as_ref().unwrap_or(&mq), &xc, &free_rows, &pinned_cols, k) {
            Some(r) => r,
            None => q_subproblem(&mq, k),
        }
        .map_err(|e| match e {
            Error::Numerical { message, .. } => Error::Numerical { iteration, message },
            other => other,
        })?;
        let u = xc.transpose() * &q;
        let a = y.map(|y| y.matrix() * &q);
        let terms = objective_terms(&xc, y, cfg, &u, &q, a.as_ref(), regularizer)?;
        if !terms.total.is_finite() {
            return Err(Error::Numerical {
                iteration,
                message: "objective is not finite".into(),
            });
        }
        if let Some(&prev) = trace.last() {
            let prev: f64 = prev;
            if terms.total > prev + MONOTONE_SLACK * prev.abs().max(scale) {
                return Err(Error::Numerical {
                    iteration,
                    message: format!("objective increased from {prev:e} to {:e}", terms.total),
                });
            }
        }
        trace.push(terms.total);

        if robust {
            let resid = &xc - &q * u.transpose();
            for (j, c) in resid.column_iter().enumerate() {
                h[j] = 0.5 / c.norm().max(REWEIGHT_FLOOR);
            }
        }
        if beta != 0.0 {
            for (i, r) in q.row_iter().enumerate() {
                g[i] = 0.5 / r.norm().max(REWEIGHT_FLOOR);
            }
        }

        let done = q_prev
            .as_ref()
            .is_some_and(|prev| aligned_distance(prev, &q) < cfg.theta);
        let c = q.transpose() * &mq * &q;
        q_prev = Some(q.clone());
        last = Some((u, q, a, c, iteration));
        if done {
            converged = true;
            break;
        }
    }

    let (u, q, a, c, iterations_run) = last.expect("max_iter >= 1");
    Ok(ProjectionModel {
        method: cfg.method,
        u,
        q,
        a,
        center,
        objective_trace: trace,
        iterations_run,
        converged,
        state: SolverState {
            g,
            e: h,
            c,
            mu: cfg.mu,
        },
    })
}

fn validate(x: &DMatrix<f64>, y: Option<&OneHotMatrix>, cfg: &SolverConfig) -> Result<()> {
    let (n, m) = x.shape();
    if cfg.k == 0 || cfg.k > n.min(m) {
        return Err(Error::Config(format!("k = {} outside [1, {}]", cfg.k, n.min(m))));
    }
    if !(cfg.theta > 0.0) {
        return Err(Error::Config(format!("theta must be positive, got {}", cfg.theta)));
    }
    if cfg.max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    if !(cfg.mu > 0.0) || !cfg.mu.is_finite() {
        return Err(Error::Config(format!("mu must be positive, got {}", cfg.mu)));
    }
    for (name, w) in [("alpha", cfg.alpha), ("beta", cfg.beta), ("gamma", cfg.gamma)] {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Config(format!("{name} must be finite and non-negative, got {w}")));
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidDataset("data matrix has non-finite entries".into()));
    }
    if cfg.method.supervised() {
        let y = y.ok_or_else(|| {
            Error::Config(format!("{} needs a label matrix", cfg.method.name()))
        })?;
        if y.matrix().ncols() != n {
            return Err(Error::Shape(format!(
                "label matrix has {} columns for {n} samples",
                y.matrix().ncols()
            )));
        }
    }
    Ok(())
}

/// Objective value at U = 0, A = 0: the reference magnitude for the
/// monotonicity slack.
fn problem_scale(xc: &DMatrix<f64>, y: Option<&OneHotMatrix>, alpha: f64, robust: bool) -> f64 {
    let data = if robust {
        xc.column_iter().map(|c| c.norm()).sum()
    } else {
        xc.norm_squared()
    };
    let label = y.map_or(0.0, |y| alpha * y.matrix().norm_squared());
    (data + label).max(f64::MIN_POSITIVE)
}

/// Q step with floored rows held at zero and floored feature columns held
/// inside the span of Q, the limits of their reweighting terms. `None` when
/// nothing is pinned or the constraints leave no room for `k` columns.
fn q_step(
    mq: &DMatrix<f64>,
    xc: &DMatrix<f64>,
    free_rows: &[usize],
    pinned_cols: &[usize],
    k: usize,
) -> Option<Result<DMatrix<f64>>> {
    let n = mq.nrows();
    if (free_rows.len() == n && pinned_cols.is_empty()) || free_rows.len() < k {
        return None;
    }
    let sub = mq.select_rows(free_rows).select_columns(free_rows);
    let solved = if pinned_cols.is_empty() {
        q_subproblem(&sub, k)
    } else {
        let xz = xc.select_rows(free_rows).select_columns(pinned_cols);
        let svd = xz.svd(true, false);
        let top = svd.singular_values.max();
        if !(top > 0.0) {
            return None;
        }
        let u = svd.u.expect("requested");
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-8 * top)
            .collect();
        let r = keep.len();
        if r > k {
            return None;
        }
        let p = u.select_columns(&keep);
        if r == k {
            Ok(p)
        } else {
            // project onto the complement of span(P) and lift P above the spectrum
            let proj = DMatrix::identity(free_rows.len(), free_rows.len()) - &p * p.transpose();
            let inner = &proj * &sub * &proj;
            let lift = 2.0 * sub.norm() + 1.0;
            let shifted = (&inner + inner.transpose()) * 0.5 + &p * p.transpose() * lift;
            q_subproblem(&shifted, k - r).map(|v| {
                let mut q = DMatrix::zeros(free_rows.len(), k);
                q.columns_mut(0, r).copy_from(&p);
                q.columns_mut(r, k - r).copy_from(&v);
                q
            })
        }
    };
    Some(solved.map(|qs| {
        let mut q = DMatrix::zeros(n, k);
        for (r, &i) in free_rows.iter().enumerate() {
            q.row_mut(i).copy_from(&qs.row(r));
        }
        q
    }))
}

fn scale_columns(x: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for (j, mut c) in out.column_iter_mut().enumerate() {
        c *= w[j];
    }
    out
}

/// `‖Q − Q_prev R‖_{2,1}` for the rotation `R` best aligning `Q_prev` to `Q`.
fn aligned_distance(prev: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let svd = (prev.transpose() * q).svd(true, true);
    let rot = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => u * v_t,
        _ => DMatrix::identity(q.ncols(), q.ncols()),
    };
    super::l21_norm(&(q - prev * rot))
}
