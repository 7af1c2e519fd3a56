use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::complex::SimplicialComplex;
use super::exact;
use crate::error::Result;
use crate::reduction::smallest_eigenpairs;

/// Relative threshold below which an eigenvalue counts as harmonic.
pub const ZERO_TOL: f64 = 1e-8;

/// Signed incidence matrix of `∂_q`: rows are the `(q-1)`-simplices, columns
/// the `q`-simplices, and the face omitting vertex `i` gets sign `(-1)^i`.
/// For `q = 0` the result has no rows.
pub fn boundary_matrix(k: &SimplicialComplex, q: usize) -> DMatrix<i64> {
    let cols = k.simplices(q);
    if q == 0 {
        return DMatrix::zeros(0, cols.len());
    }
    let mut b = DMatrix::zeros(k.count(q - 1), cols.len());
    for (c, s) in cols.iter().enumerate() {
        for i in 0..s.len() {
            let mut face = s.clone();
            face.remove(i);
            let r = k.position(&face).expect("complex is face-closed");
            b[(r, c)] = if i % 2 == 0 { 1 } else { -1 };
        }
    }
    b
}

fn to_f64(m: &DMatrix<i64>) -> DMatrix<f64> {
    m.map(|v| v as f64)
}

/// `L_q = B_{q+1} B_{q+1}ᵀ + B_qᵀ B_q`, side `#q-simplices`.
pub fn combinatorial_laplacian(k: &SimplicialComplex, q: usize) -> DMatrix<f64> {
    let up = to_f64(&boundary_matrix(k, q + 1));
    let down = to_f64(&boundary_matrix(k, q));
    &up * up.transpose() + down.transpose() * down
}

/// Row selection of `B_{q+1}` of the larger complex: the rows for
/// `q`-simplices that are in `small` (in `small`'s basis order), and the rest.
fn split_rows(
    small: &SimplicialComplex,
    large: &SimplicialComplex,
    q: usize,
) -> (DMatrix<i64>, DMatrix<i64>) {
    let b = boundary_matrix(large, q + 1);
    let inside: Vec<usize> = small
        .simplices(q)
        .iter()
        .map(|s| large.position(s).expect("inclusion checked by caller"))
        .collect();
    let outside: Vec<usize> = (0..large.count(q))
        .filter(|r| !small.contains(&large.simplices(q)[*r]))
        .collect();
    (b.select_rows(inside.iter()), b.select_rows(outside.iter()))
}

/// Orthonormal basis (columns) of the nullspace of `m`.
fn float_nullspace(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 || n == 0 {
        return DMatrix::identity(n, n);
    }
    let gram = m.transpose() * m;
    let (values, vectors) = smallest_eigenpairs(&gram, n).expect("finite integer Gram matrix");
    let scale = values.iter().copied().fold(1.0f64, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&i| values[i].abs() < 1e-9 * scale).collect();
    vectors.select_columns(keep.iter())
}

/// Matrix of the `p`-persistent `q`-Laplacian for the pair `small ⊆ large`:
/// `B^{t,p}_{q+1} (B^{t,p}_{q+1})ᵀ + (B^t_q)ᵀ B^t_q`, where `B^{t,p}_{q+1}`
/// is `∂_{q+1}` of `large` restricted to chains whose boundary lies in
/// `small`. Side `#q-simplices of small`.
pub fn persistent_laplacian_matrix(
    small: &SimplicialComplex,
    large: &SimplicialComplex,
    q: usize,
) -> Result<DMatrix<f64>> {
    small.check_subcomplex_of(large)?;
    let (b_in, b_out) = split_rows(small, large, q);
    let z = float_nullspace(&to_f64(&b_out));
    let restricted = to_f64(&b_in) * z;
    let down = to_f64(&boundary_matrix(small, q));
    Ok(&restricted * restricted.transpose() + down.transpose() * down)
}

/// Spectrum of a (persistent) Laplacian with its harmonic multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistentSpectrum {
    pub q: usize,
    pub t: usize,
    pub p: usize,
    pub eigenvalues: Vec<f64>,
    pub betti: usize,
}

/// Sorted eigenvalues with near-zero values snapped to 0, and the count of
/// those zeros. The threshold is `ZERO_TOL · max(1, λ_max)`.
pub fn harmonic_spectrum(m: DMatrix<f64>) -> (Vec<f64>, usize) {
    if m.nrows() == 0 {
        return (Vec::new(), 0);
    }
    let n = m.nrows();
    let mut ev: Vec<f64> = match smallest_eigenpairs(&m, n) {
        Ok((values, _)) => values.iter().copied().collect(),
        Err(_) => vec![f64::NAN; n],
    };
    ev.sort_by(f64::total_cmp);
    let tol = ZERO_TOL * ev.last().copied().unwrap_or(0.0).max(1.0);
    let mut zeros = 0;
    for v in ev.iter_mut() {
        if *v < tol {
            *v = 0.0;
            zeros += 1;
        }
    }
    (ev, zeros)
}

pub fn persistent_laplacian_q(
    small: &SimplicialComplex,
    large: &SimplicialComplex,
    q: usize,
) -> Result<PersistentSpectrum> {
    let (eigenvalues, betti) = harmonic_spectrum(persistent_laplacian_matrix(small, large, q)?);
    Ok(PersistentSpectrum {
        q,
        t: 0,
        p: 0,
        eigenvalues,
        betti,
    })
}

/// Spectra of `L_q^{t,p}` for every `t` with `t + p` inside the filtration.
/// Indices `t` are 0-based positions in `filtration`.
pub fn filtration_spectra(
    filtration: &[SimplicialComplex],
    q: usize,
    p: usize,
) -> Result<Vec<PersistentSpectrum>> {
    (0..filtration.len().saturating_sub(p))
        .map(|t| {
            let mut s = persistent_laplacian_q(&filtration[t], &filtration[t + p], q)?;
            s.t = t;
            s.p = p;
            Ok(s)
        })
        .collect()
}

/// `β_q = dim C_q − rank B_q − rank B_{q+1}`, in exact arithmetic.
pub fn betti_exact(k: &SimplicialComplex, q: usize) -> usize {
    k.count(q) - exact::rank(&boundary_matrix(k, q)) - exact::rank(&boundary_matrix(k, q + 1))
}

/// `β_q^{t,p} = dim ker B_q^t − rank B^{t,p}_{q+1}`, with the restricted
/// boundary built from an exact rational basis of the persistent chain space.
pub fn persistent_betti_exact(
    small: &SimplicialComplex,
    large: &SimplicialComplex,
    q: usize,
) -> Result<usize> {
    small.check_subcomplex_of(large)?;
    let ker = small.count(q) - exact::rank(&boundary_matrix(small, q));
    let (b_in, b_out) = split_rows(small, large, q);
    let basis = exact::nullspace(&b_out);
    Ok(ker - exact::rank_on_subspace(&b_in, &basis))
}
