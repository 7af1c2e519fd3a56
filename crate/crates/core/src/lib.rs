//! Persistent-Laplacian-regularized PCA and its relatives, with the
//! persistent spectral graph machinery and a KNN evaluation harness.

pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod persistence;
pub mod reduction;

pub use error::{Error, Result};
