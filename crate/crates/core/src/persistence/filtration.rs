//! Multi-threshold binarization of a weighted graph Laplacian and the
//! weighted aggregate used as a regularizer.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of the threshold keeps an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterDirection {
    /// Keep an edge while `l_ij <= threshold_t`: strongest (most negative)
    /// connections enter first and the edge sets grow with `t`.
    #[default]
    AsText,
    /// Drop an edge while `l_ij <= threshold_t`: strongest connections are
    /// removed first and the last member is the zero matrix.
    AsEquation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredFamily {
    pub members: Vec<DMatrix<f64>>,
    pub direction: FilterDirection,
}

/// Builds `p` binarized Laplacians from the weighted Laplacian `l`.
///
/// Only edges (non-zero off-diagonals) take part: thresholds run from
/// `l_min` to `l_max` over edge values as `l_min + (t/p)·d`, and non-edges
/// stay zero in every member. The last threshold is exactly `l_max`.
pub fn filtered_family(
    l: &DMatrix<f64>,
    p: usize,
    direction: FilterDirection,
) -> Result<FilteredFamily> {
    let n = l.nrows();
    if l.ncols() != n {
        return Err(Error::Shape(format!("Laplacian is {}x{}", n, l.ncols())));
    }
    if p == 0 {
        return Err(Error::Config("need at least one filtration".into()));
    }
    let edges: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| l[(i, j)] != 0.0)
        .map(|(i, j)| (i, j, l[(i, j)]))
        .collect();
    if edges.is_empty() {
        return Err(Error::Config("Laplacian has no off-diagonal entries".into()));
    }
    let l_min = edges.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
    let l_max = edges.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
    let d = l_max - l_min;

    let members = (1..=p)
        .map(|t| {
            let threshold = if t == p {
                l_max
            } else {
                (t as f64 / p as f64) * d + l_min
            };
            let mut m = DMatrix::zeros(n, n);
            for &(i, j, v) in &edges {
                let below = v <= threshold;
                let keep = match direction {
                    FilterDirection::AsText => below,
                    FilterDirection::AsEquation => !below,
                };
                if keep {
                    m[(i, j)] = -1.0;
                    m[(j, i)] = -1.0;
                    m[(i, i)] += 1.0;
                    m[(j, j)] += 1.0;
                }
            }
            m
        })
        .collect();
    Ok(FilteredFamily { members, direction })
}

/// `PL = Σ ζ_t L^t` with the weights rescaled to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistentRegularizer {
    pub family: FilteredFamily,
    pub zeta: Vec<f64>,
    pub pl: DMatrix<f64>,
}

pub fn aggregate_pl(family: FilteredFamily, zeta: &[f64]) -> Result<PersistentRegularizer> {
    if zeta.len() != family.members.len() {
        return Err(Error::Config(format!(
            "{} weights for {} filtrations",
            zeta.len(),
            family.members.len()
        )));
    }
    if zeta.iter().any(|z| !z.is_finite() || *z < 0.0) {
        return Err(Error::Config(format!("weights must be finite and non-negative: {zeta:?}")));
    }
    let total: f64 = zeta.iter().sum();
    if total <= 0.0 {
        return Err(Error::Config("all filtration weights are zero".into()));
    }
    let n = family.members[0].nrows();
    // Accumulate with the raw weights and divide once, so scaling every
    // weight by a common factor leaves PL unchanged.
    let mut pl = DMatrix::zeros(n, n);
    for (m, &z) in family.members.iter().zip(zeta) {
        if z > 0.0 {
            pl += m * z;
        }
    }
    pl /= total;
    let zeta = zeta.iter().map(|z| z / total).collect();
    Ok(PersistentRegularizer { family, zeta, pl })
}

/// Edge set of a binarized Laplacian as `(i, j)` pairs with `i < j`.
pub fn edge_set(m: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let n = m.nrows();
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| m[(i, j)] != 0.0)
        .collect()
}
