//! KNN similarity graph with Gaussian-kernel weights and its Laplacian.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Squared median distance over connected pairs.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphLaplacian {
    pub adjacency: DMatrix<f64>,
    pub degree: DVector<f64>,
    pub laplacian: DMatrix<f64>,
    pub eta: f64,
    pub knn_k: usize,
}

impl GraphLaplacian {
    pub fn n_nodes(&self) -> usize {
        self.adjacency.nrows()
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        let n = self.n_nodes();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adjacency[(i, j)] > 0.0)
            .count()
    }
}

/// Row-wise squared Euclidean distances, computed directly so duplicate rows
/// give exact zeros.
pub fn pairwise_sq_distances(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    x.row(i)
                        .iter()
                        .zip(x.row(j).iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum()
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Symmetric KNN adjacency as a boolean mask: `i ~ j` when either selects the
/// other among its `k` nearest (ties broken by lower index).
pub fn knn_mask(sq_dist: &DMatrix<f64>, k: usize) -> Vec<Vec<bool>> {
    let n = sq_dist.nrows();
    let mut mask = vec![vec![false; n]; n];
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| sq_dist[(i, a)].total_cmp(&sq_dist[(i, b)]).then(a.cmp(&b)));
        for &j in order.iter().take(k) {
            mask[i][j] = true;
            mask[j][i] = true;
        }
    }
    mask
}

pub fn build_knn_graph(x: &DMatrix<f64>, knn_k: usize, eta: Bandwidth) -> Result<GraphLaplacian> {
    let n = x.nrows();
    if n < 2 || knn_k == 0 || knn_k >= n {
        return Err(Error::Config(format!(
            "knn_k must lie in [1, n-1]; got k = {knn_k} for n = {n}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidDataset("non-finite entry in graph input".into()));
    }
    let sq = pairwise_sq_distances(x);
    let mask = knn_mask(&sq, knn_k);

    let eta = match eta {
        Bandwidth::Fixed(e) if e > 0.0 && e.is_finite() => e,
        Bandwidth::Fixed(e) => return Err(Error::Config(format!("eta must be positive, got {e}"))),
        Bandwidth::Auto => {
            let mut d: Vec<f64> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| mask[i][j])
                .map(|(i, j)| sq[(i, j)].sqrt())
                .collect();
            d.sort_by(f64::total_cmp);
            let len = d.len();
            let median = if len % 2 == 1 {
                d[len / 2]
            } else {
                0.5 * (d[len / 2 - 1] + d[len / 2])
            };
            if median > 0.0 {
                median * median
            } else {
                1.0
            }
        }
    };

    let adjacency = DMatrix::from_fn(n, n, |i, j| {
        if i != j && mask[i][j] {
            (-sq[(i, j)] / eta).exp()
        } else {
            0.0
        }
    });
    Ok(from_adjacency(adjacency, eta, knn_k))
}

/// Degree vector and `L = D - W` for a given symmetric adjacency.
pub fn from_adjacency(adjacency: DMatrix<f64>, eta: f64, knn_k: usize) -> GraphLaplacian {
    let degree = DVector::from_iterator(
        adjacency.nrows(),
        adjacency.row_iter().map(|r| r.sum()),
    );
    let laplacian = DMatrix::from_diagonal(&degree) - &adjacency;
    GraphLaplacian {
        adjacency,
        degree,
        laplacian,
        eta,
        knn_k,
    }
}

/// `tr(QᵀLQ)`, which equals `½ Σ_ij W_ij ‖Q_i − Q_j‖²` for `L = D − W`.
pub fn laplacian_quadratic(q: &DMatrix<f64>, laplacian: &DMatrix<f64>) -> Result<f64> {
    let n = laplacian.nrows();
    if laplacian.ncols() != n || q.nrows() != n {
        return Err(Error::Shape(format!(
            "Q is {}x{}, L is {}x{}",
            q.nrows(),
            q.ncols(),
            laplacian.nrows(),
            laplacian.ncols()
        )));
    }
    let lq = laplacian * q;
    Ok(q.iter().zip(lq.iter()).map(|(a, b)| a * b).sum())
}
