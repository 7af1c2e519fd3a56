use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{solver, ProjectionModel, SolverConfig};
use crate::data::{one_hot, ExpressionDataset, OneHotMatrix};
use crate::error::{Error, Result};
use crate::graph::laplacian_quadratic;

/// Sum of the Euclidean norms of the rows.
pub fn l21_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.norm()).sum()
}

/// Weighted objective terms; `total` is their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    pub data: f64,
    pub label: f64,
    pub sparsity: f64,
    pub graph: f64,
    pub total: f64,
}

/// Evaluates the method's objective at `(U, Q, A)` on the already-centered
/// data `xc`. `regularizer` must be present when the method has a graph term
/// with non-zero weight.
pub fn objective_terms(
    xc: &DMatrix<f64>,
    y: Option<&OneHotMatrix>,
    cfg: &SolverConfig,
    u: &DMatrix<f64>,
    q: &DMatrix<f64>,
    a: Option<&DMatrix<f64>>,
    regularizer: Option<&DMatrix<f64>>,
) -> Result<ObjectiveTerms> {
    let (n, m) = xc.shape();
    let k = q.ncols();
    if q.nrows() != n || u.shape() != (m, k) {
        return Err(Error::Shape(format!(
            "X {n}x{m}, Q {}x{}, U {}x{}",
            q.nrows(),
            q.ncols(),
            u.nrows(),
            u.ncols()
        )));
    }
    let (alpha, beta, gamma) = cfg.effective_weights();
    let residual = xc - q * u.transpose();
    let data = if cfg.method.robust_loss() {
        // L2,1 over feature columns of the samples × features residual
        residual.column_iter().map(|c| c.norm()).sum()
    } else {
        residual.norm_squared()
    };
    let label = if alpha != 0.0 {
        let y = y.ok_or_else(|| Error::Config("label term needs a label matrix".into()))?;
        let a = a.ok_or_else(|| Error::Shape("label term needs A".into()))?;
        if y.matrix().ncols() != n || a.shape() != (y.matrix().nrows(), k) {
            return Err(Error::Shape("label matrix or A does not conform".into()));
        }
        alpha * (y.matrix() - a * q.transpose()).norm_squared()
    } else {
        0.0
    };
    let sparsity = if beta != 0.0 { beta * l21_norm(q) } else { 0.0 };
    let graph = if gamma != 0.0 {
        let r = regularizer
            .ok_or_else(|| Error::Config("graph term needs a regularizer matrix".into()))?;
        gamma * laplacian_quadratic(q, r)?
    } else {
        0.0
    };
    Ok(ObjectiveTerms {
        data,
        label,
        sparsity,
        graph,
        total: data + label + sparsity + graph,
    })
}

/// Objective of `model` on `ds`, rebuilding the graph regularizer from `cfg`.
pub fn objective(
    ds: &ExpressionDataset,
    y: Option<&OneHotMatrix>,
    cfg: &SolverConfig,
    model: &ProjectionModel,
) -> Result<f64> {
    if model.center.len() != ds.n_features() {
        return Err(Error::Shape(format!(
            "model has {} feature means, dataset has {} features",
            model.center.len(),
            ds.n_features()
        )));
    }
    let xc = center_rows(ds.x(), &model.center);
    let owned;
    let y = match y {
        Some(y) => Some(y),
        None if cfg.method.supervised() => {
            owned = one_hot(ds.labels(), ds.n_classes())?;
            Some(&owned)
        }
        None => None,
    };
    let reg = solver::build_regularizer(ds.x(), cfg)?;
    objective_terms(&xc, y, cfg, &model.u, &model.q, model.a.as_ref(), reg.as_ref()).map(|t| t.total)
}

pub(crate) fn center_rows(x: &DMatrix<f64>, center: &DVector<f64>) -> DMatrix<f64> {
    let mut xc = x.clone();
    for mut row in xc.row_iter_mut() {
        row -= center.transpose();
    }
    xc
}
