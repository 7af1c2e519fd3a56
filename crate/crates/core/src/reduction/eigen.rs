use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative symmetry tolerance accepted by [`q_subproblem`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvectors for the `k` algebraically smallest eigenvalues of a
/// symmetric matrix, as orthonormal columns, with their eigenvalues.
///
/// Each vector is signed so its largest-magnitude entry (first one on ties)
/// is positive. Equal eigenvalues are ordered by comparing the signed
/// vectors lexicographically, larger first, so the identity yields
/// `e_1, e_2, ...`.
pub fn smallest_eigenpairs(m: &DMatrix<f64>, k: usize) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Shape(format!("matrix is {}x{}", n, m.ncols())));
    }
    if k == 0 || k > n {
        return Err(Error::Config(format!("k = {k} outside [1, {n}]")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            iteration: 0,
            message: "non-finite entry in eigenproblem".into(),
        });
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let sym = (m + m.transpose()) * 0.5;
    let (values, u) = dense_eigen(&sym);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            iteration: 0,
            message: "symmetric eigensolver produced non-finite values".into(),
        });
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|c| {
            let mut v: Vec<f64> = u.column(c).iter().copied().collect();
            let lead = v
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |best, (i, x)| if x.abs() > best.1 { (i, x.abs()) } else { best })
                .0;
            if v[lead] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (values[c], v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // reorder runs of eigenvalues equal to within a few ulps of the spectral radius
    let radius = pairs.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let tie = 4.0 * f64::EPSILON * radius;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end].0 - pairs[start].0 <= tie {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| lex_desc(&a.1, &b.1));
        start = end;
    }

    let values = DVector::from_iterator(k, pairs.iter().take(k).map(|p| p.0));
    let vectors = DMatrix::from_fn(n, k, |i, j| pairs[j].1[i]);
    Ok((values, vectors))
}

/// Full eigendecomposition, single-threaded so results do not depend on
/// the thread pool.
fn dense_eigen(sym: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    use faer::dyn_stack::{GlobalPodBuffer, PodStack};
    use faer::linalg::evd;

    let n = sym.nrows();
    let a = faer::mat::from_column_major_slice::<f64>(sym.as_slice(), n, n);
    let mut s = faer::Col::<f64>::zeros(n);
    let mut u = faer::Mat::<f64>::zeros(n, n);
    let params = Default::default();
    let req = evd::compute_hermitian_evd_req::<f64>(n, evd::ComputeVectors::Yes, faer::Parallelism::None, params)
        .expect("workspace size overflow");
    evd::compute_hermitian_evd(
        a,
        s.as_mut(),
        Some(u.as_mut()),
        faer::Parallelism::None,
        PodStack::new(&mut GlobalPodBuffer::new(req)),
        params,
    );
    let values = (0..n).map(|i| s.read(i)).collect();
    (values, DMatrix::from_fn(n, n, |i, j| u.read(i, j)))
}

fn lex_desc(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match y.total_cmp(x) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Orthonormal minimizer of `tr(Qᵀ M Q)` over `n × k` matrices with
/// orthonormal columns.
pub fn q_subproblem(m: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    smallest_eigenpairs(m, k).map(|(_, v)| v)
}
