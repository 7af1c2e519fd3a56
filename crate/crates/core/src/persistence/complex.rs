use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Face-closed simplicial complex on vertices `0..n_vertices`.
///
/// Simplices are sorted vertex tuples; within each dimension they are unique
/// and kept in lexicographic order, which fixes the chain-group bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    n_vertices: usize,
    simplices: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl SimplicialComplex {
    /// Builds the smallest complex containing every given simplex (and all
    /// of its faces). Every vertex `0..n_vertices` is included.
    pub fn from_simplices<I, S>(n_vertices: usize, simplices: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[usize]>,
    {
        let mut by_dim: Vec<BTreeSet<Vec<usize>>> = vec![(0..n_vertices).map(|v| vec![v]).collect()];
        for s in simplices {
            let mut s = s.as_ref().to_vec();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                continue;
            }
            if let Some(&v) = s.iter().find(|&&v| v >= n_vertices) {
                return Err(Error::Config(format!(
                    "vertex {v} out of range for {n_vertices} vertices"
                )));
            }
            add_with_faces(&mut by_dim, s);
        }
        Ok(Self::from_sets(n_vertices, by_dim))
    }

    fn from_sets(n_vertices: usize, by_dim: Vec<BTreeSet<Vec<usize>>>) -> Self {
        let mut simplices: Vec<Vec<Vec<usize>>> =
            by_dim.into_iter().map(|s| s.into_iter().collect()).collect();
        while simplices.len() > 1 && simplices.last().is_some_and(|s| s.is_empty()) {
            simplices.pop();
        }
        let index = simplices
            .iter()
            .map(|dim| dim.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        Self {
            n_vertices,
            simplices,
            index,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Highest dimension with at least one simplex.
    pub fn dim(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    /// The `q`-simplices in basis order; empty beyond the top dimension.
    pub fn simplices(&self, q: usize) -> &[Vec<usize>] {
        self.simplices.get(q).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, q: usize) -> usize {
        self.simplices(q).len()
    }

    /// Basis position of `simplex` (which must be sorted) among the
    /// `(len-1)`-simplices.
    pub fn position(&self, simplex: &[usize]) -> Option<usize> {
        let q = simplex.len().checked_sub(1)?;
        self.index.get(q)?.get(simplex).copied()
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        self.position(simplex).is_some()
    }

    /// Checks `self ⊆ other`, returning the first missing simplex otherwise.
    pub fn check_subcomplex_of(&self, other: &SimplicialComplex) -> Result<()> {
        for dim in &self.simplices {
            for s in dim {
                if !other.contains(s) {
                    return Err(Error::Inclusion { simplex: s.clone() });
                }
            }
        }
        Ok(())
    }

    /// Every face of every simplex is present.
    pub fn is_face_closed(&self) -> bool {
        self.simplices.iter().skip(1).flatten().all(|s| {
            (0..s.len()).all(|i| {
                let mut f = s.clone();
                f.remove(i);
                self.contains(&f)
            })
        })
    }
}

fn add_with_faces(by_dim: &mut Vec<BTreeSet<Vec<usize>>>, s: Vec<usize>) {
    let q = s.len() - 1;
    while by_dim.len() <= q {
        by_dim.push(BTreeSet::new());
    }
    if by_dim[q].contains(&s) {
        return;
    }
    if q > 0 {
        for i in 0..s.len() {
            let mut f = s.clone();
            f.remove(i);
            add_with_faces(by_dim, f);
        }
    }
    by_dim[q].insert(s);
}

/// Vietoris–Rips complex: vertices are the rows of `points`, an edge joins
/// rows within Euclidean distance `epsilon` (inclusive), and every clique of
/// `q + 1` vertices becomes a `q`-simplex for `q <= max_dim`.
pub fn build_complex_vr(points: &DMatrix<f64>, epsilon: f64, max_dim: usize) -> SimplicialComplex {
    let n = points.nrows();
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i != j && (points.row(i) - points.row(j)).norm() <= epsilon)
                .collect()
        })
        .collect();
    clique_complex(&adj, max_dim)
}

/// Clique (flag) complex of a symmetric adjacency mask, truncated at `max_dim`.
pub fn clique_complex(adj: &[Vec<bool>], max_dim: usize) -> SimplicialComplex {
    let n = adj.len();
    let mut by_dim: Vec<BTreeSet<Vec<usize>>> = vec![(0..n).map(|v| vec![v]).collect()];
    for q in 1..=max_dim {
        let next: BTreeSet<Vec<usize>> = by_dim[q - 1]
            .iter()
            .flat_map(|s| {
                let last = *s.last().expect("simplices are non-empty");
                (last + 1..n)
                    .filter(|&v| s.iter().all(|&u| adj[u][v]))
                    .map(|v| {
                        let mut t = s.clone();
                        t.push(v);
                        t
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        if next.is_empty() {
            break;
        }
        by_dim.push(next);
    }
    SimplicialComplex::from_sets(n, by_dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_within_epsilon() {
        let pts = DMatrix::from_row_slice(3, 2, &[0., 0., 1., 0., 0.5, 0.8]);
        let k = build_complex_vr(&pts, 1.0, 2);
        assert_eq!((k.count(0), k.count(1), k.count(2)), (3, 3, 1));
        assert_eq!(k.simplices(1), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn zero_epsilon_gives_vertices_only() {
        let pts = DMatrix::from_row_slice(3, 1, &[0., 1., 2.]);
        let k = build_complex_vr(&pts, 0.0, 2);
        assert_eq!((k.count(0), k.count(1), k.dim()), (3, 0, 0));
    }

    #[test]
    fn square_has_no_triangles() {
        let pts = DMatrix::from_row_slice(4, 2, &[0., 0., 1., 0., 1., 1., 0., 1.]);
        let k = build_complex_vr(&pts, 1.1, 2);
        assert_eq!((k.count(1), k.count(2)), (4, 0));
    }

    #[test]
    fn closure_and_inclusion() {
        let k = SimplicialComplex::from_simplices(4, [vec![2, 0, 1]]).unwrap();
        assert!(k.is_face_closed());
        assert_eq!(k.count(1), 3);
        assert_eq!(k.count(0), 4);
        let big = SimplicialComplex::from_simplices(4, [vec![0, 1, 2], vec![2, 3]]).unwrap();
        assert!(k.check_subcomplex_of(&big).is_ok());
        assert!(matches!(
            big.check_subcomplex_of(&k),
            Err(Error::Inclusion { simplex }) if simplex == vec![2, 3]
        ));
        assert!(SimplicialComplex::from_simplices(2, [vec![0, 5]]).is_err());
    }
}
