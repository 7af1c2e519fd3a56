use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{objective::center_rows, Method, SolverConfig};
use crate::error::{Error, Result};
use crate::io::{matrix_to_csv, write_atomic};

/// Auxiliary state carried between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// IRLS weights for the rows of Q (sparsity term), floored row norms.
    pub g: DVector<f64>,
    /// IRLS weights for the feature columns of the residual (robust loss).
    pub e: DVector<f64>,
    /// Multiplier of the orthogonality constraint, `Qᵀ M Q` at the optimum.
    pub c: DMatrix<f64>,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionModel {
    pub method: Method,
    /// m × k principal directions.
    pub u: DMatrix<f64>,
    /// n × k projected training data, orthonormal columns.
    pub q: DMatrix<f64>,
    /// c × k label fit, for supervised methods.
    pub a: Option<DMatrix<f64>>,
    /// Feature means subtracted before fitting (zeros when not centering).
    pub center: DVector<f64>,
    pub objective_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    pub state: SolverState,
}

#[derive(Serialize, Deserialize)]
struct TraceRecord {
    method: Method,
    objective_trace: Vec<f64>,
    iterations_run: usize,
    converged: bool,
}

impl ProjectionModel {
    pub fn k(&self) -> usize {
        self.q.ncols()
    }

    /// Orthonormal basis of span(U): `U (UᵀU)^{-1/2}`, with directions of
    /// vanishing norm dropped to zero.
    pub fn directions(&self) -> DMatrix<f64> {
        let gram = self.u.transpose() * &self.u;
        let eig = gram.symmetric_eigen();
        let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
        let inv_sqrt = DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues
                .iter()
                .map(|&l| if l > 1e-12 * scale { 1.0 / l.sqrt() } else { 0.0 }),
        );
        let w = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
        &self.u * w
    }

    /// Scores of new samples: centered rows projected on [`Self::directions`].
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.u.nrows() {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.u.nrows(),
                x.ncols()
            )));
        }
        Ok(center_rows(x, &self.center) * self.directions())
    }

    /// Writes `U.csv`, `Q.csv`, `A.csv` (supervised only), `center.csv`,
    /// `trace.json` and `config.json` into `dir`.
    pub fn save(&self, dir: &Path, cfg: &SolverConfig) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_atomic(&dir.join("U.csv"), matrix_to_csv(&self.u).as_bytes())?;
        write_atomic(&dir.join("Q.csv"), matrix_to_csv(&self.q).as_bytes())?;
        if let Some(a) = &self.a {
            write_atomic(&dir.join("A.csv"), matrix_to_csv(a).as_bytes())?;
        }
        let center = DMatrix::from_row_slice(1, self.center.len(), self.center.as_slice());
        write_atomic(&dir.join("center.csv"), matrix_to_csv(&center).as_bytes())?;
        let trace = TraceRecord {
            method: self.method,
            objective_trace: self.objective_trace.clone(),
            iterations_run: self.iterations_run,
            converged: self.converged,
        };
        write_atomic(&dir.join("trace.json"), serde_json::to_string_pretty(&trace)?.as_bytes())?;
        write_atomic(&dir.join("config.json"), serde_json::to_string_pretty(cfg)?.as_bytes())
    }
}
