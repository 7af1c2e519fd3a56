//! Persistent spectral graph machinery: simplicial complexes, boundary
//! operators, combinatorial and persistent Laplacians, and the filtered
//! Laplacian family aggregated into a single regularizer.

mod complex;
pub mod exact;
mod filtration;
mod laplacian;

pub use complex::{build_complex_vr, clique_complex, SimplicialComplex};
pub use filtration::{
    aggregate_pl, edge_set, filtered_family, FilterDirection, FilteredFamily, PersistentRegularizer,
};
pub use laplacian::{
    betti_exact, boundary_matrix, combinatorial_laplacian, filtration_spectra, harmonic_spectrum,
    persistent_betti_exact, persistent_laplacian_matrix, persistent_laplacian_q, PersistentSpectrum,
    ZERO_TOL,
};
