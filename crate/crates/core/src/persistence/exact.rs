//! Exact rational linear algebra for rank and nullspace computations on
//! boundary matrices.

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Zero};

type Q = BigRational;

fn to_rational(m: &DMatrix<i64>) -> Vec<Vec<Q>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Q::from_integer(m[(i, j)].into())).collect())
        .collect()
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(a: &mut [Vec<Q>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == a.len() {
            break;
        }
        let Some(p) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = Q::one() / a[row][col].clone();
        for v in a[row].iter_mut() {
            *v *= inv.clone();
        }
        for r in 0..a.len() {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..ncols {
                    let t = f.clone() * a[row][c].clone();
                    a[r][c] -= t;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank(m: &DMatrix<i64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let mut a = to_rational(m);
    rref(&mut a, m.ncols()).len()
}

/// Basis of `{v : m v = 0}` over the rationals, one vector per free column.
pub fn nullspace(m: &DMatrix<i64>) -> Vec<Vec<Q>> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return (0..n)
            .map(|j| (0..n).map(|i| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect();
    }
    let mut a = to_rational(m);
    let pivots = rref(&mut a, n);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); n];
            v[f] = Q::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// Rank of `m · [basis vectors as columns]`.
pub fn rank_on_subspace(m: &DMatrix<i64>, basis: &[Vec<Q>]) -> usize {
    if m.nrows() == 0 || basis.is_empty() {
        return 0;
    }
    // rows of (m B)ᵀ, i.e. one row per basis vector
    let mut a: Vec<Vec<Q>> = basis
        .iter()
        .map(|v| {
            (0..m.nrows())
                .map(|i| {
                    v.iter()
                        .enumerate()
                        .filter(|(_, x)| !x.is_zero())
                        .fold(Q::zero(), |acc, (j, x)| acc + x.clone() * Q::from_integer(m[(i, j)].into()))
                })
                .collect()
        })
        .collect();
    rref(&mut a, m.nrows()).len()
}
