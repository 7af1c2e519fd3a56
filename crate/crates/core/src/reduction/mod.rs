//! The PCA family: PCA, SDSPCA, gLPCA, LSDSPCA, RLSDSPCA, pLPCA and PLPCA
//! behind one alternating-minimization solver.
//!
//! All methods minimize a subset of
//!
//! ```text
//! loss(X − Q Uᵀ) + α‖Y − A Qᵀ‖²_F + β‖Q‖_{2,1} + γ tr(Qᵀ R Q)   s.t. QᵀQ = I
//! ```
//!
//! where `X` is the centered samples × features matrix, `loss` is the squared
//! Frobenius norm or the L2,1 norm over feature columns, `Y` the one-hot
//! label matrix and `R` either the weighted KNN Laplacian or the aggregated
//! persistent Laplacian.

mod eigen;
mod model;
mod objective;
mod solver;

use serde::{Deserialize, Serialize};

use crate::graph::Bandwidth;
use crate::persistence::FilterDirection;

pub use eigen::{q_subproblem, smallest_eigenpairs};
pub use model::{ProjectionModel, SolverState};
pub use objective::{l21_norm, objective, objective_terms, ObjectiveTerms};
pub use solver::{build_regularizer, fit, fit_matrix, fit_with_regularizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "PCA")]
    Pca,
    #[serde(rename = "SDSPCA")]
    Sdspca,
    #[serde(rename = "GLPCA")]
    Glpca,
    #[serde(rename = "LSDSPCA")]
    Lsdspca,
    #[serde(rename = "RLSDSPCA")]
    Rlsdspca,
    #[serde(rename = "PLPCA_SIMPLE")]
    PlpcaSimple,
    #[serde(rename = "PLPCA_FULL")]
    PlpcaFull,
}

/// Which Laplacian a method regularizes with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    None,
    Weighted,
    Persistent,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Pca,
        Method::Sdspca,
        Method::Glpca,
        Method::Lsdspca,
        Method::Rlsdspca,
        Method::PlpcaSimple,
        Method::PlpcaFull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "PCA",
            Method::Sdspca => "SDSPCA",
            Method::Glpca => "GLPCA",
            Method::Lsdspca => "LSDSPCA",
            Method::Rlsdspca => "RLSDSPCA",
            Method::PlpcaSimple => "PLPCA_SIMPLE",
            Method::PlpcaFull => "PLPCA_FULL",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        let m = match norm.as_str() {
            "PCA" => Method::Pca,
            "SDSPCA" => Method::Sdspca,
            "GLPCA" => Method::Glpca,
            "LSDSPCA" => Method::Lsdspca,
            "RLSDSPCA" => Method::Rlsdspca,
            "PLPCA_SIMPLE" => Method::PlpcaSimple,
            "PLPCA_FULL" | "PLPCA" => Method::PlpcaFull,
            _ => return None,
        };
        Some(m)
    }

    /// Uses the label-fit and sparsity terms (and therefore needs labels).
    pub fn supervised(self) -> bool {
        matches!(
            self,
            Method::Sdspca | Method::Lsdspca | Method::Rlsdspca | Method::PlpcaFull
        )
    }

    /// Data loss is the L2,1 norm rather than the squared Frobenius norm.
    pub fn robust_loss(self) -> bool {
        matches!(self, Method::Rlsdspca | Method::PlpcaFull)
    }

    pub fn graph(self) -> GraphKind {
        match self {
            Method::Pca | Method::Sdspca => GraphKind::None,
            Method::Glpca | Method::Lsdspca | Method::Rlsdspca => GraphKind::Weighted,
            Method::PlpcaSimple | Method::PlpcaFull => GraphKind::Persistent,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Graph and filtration parameters for the Laplacian-regularized methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub knn_k: usize,
    pub eta: Bandwidth,
    pub p: usize,
    /// Filtration weights; empty means uniform over `p`.
    pub zeta: Vec<f64>,
    pub direction: FilterDirection,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            knn_k: 5,
            eta: Bandwidth::Auto,
            p: 6,
            zeta: Vec::new(),
            direction: FilterDirection::AsText,
        }
    }
}

impl GraphParams {
    pub fn resolved_zeta(&self) -> Vec<f64> {
        if self.zeta.is_empty() {
            vec![1.0; self.p]
        } else {
            self.zeta.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Convergence tolerance on the L2,1 distance between successive Q.
    pub theta: f64,
    pub max_iter: usize,
    pub mu: f64,
    /// Subtract feature means before fitting.
    pub center: bool,
    pub graph: GraphParams,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::PlpcaFull,
            k: 2,
            alpha: 1e-4,
            beta: 0.5,
            gamma: 1e-4,
            theta: 1e-6,
            max_iter: 200,
            mu: 1.0,
            center: true,
            graph: GraphParams::default(),
        }
    }
}

impl SolverConfig {
    pub fn new(method: Method, k: usize) -> Self {
        Self {
            method,
            k,
            ..Self::default()
        }
    }

    /// `(α, β, γ)` after zeroing the terms the method does not have.
    pub fn effective_weights(&self) -> (f64, f64, f64) {
        let m = self.method;
        let alpha = if m.supervised() { self.alpha } else { 0.0 };
        let beta = if m.supervised() { self.beta } else { 0.0 };
        let gamma = if m.graph() == GraphKind::None { 0.0 } else { self.gamma };
        (alpha, beta, gamma)
    }
}
