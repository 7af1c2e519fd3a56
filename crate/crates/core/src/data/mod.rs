//! Expression datasets: validation, normalization, label encoding, splitting
//! and synthetic generation.
//!
//! Matrices are always stored samples × features, whatever the orientation
//! of the source file.

mod csv;
mod split;
mod synth;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use self::csv::{ingest_csv, write_csv, HeaderMode, IngestOptions, LabelSource, Orientation};
pub use self::split::{make_splits, Split, SplitMode, SplitPlan};
pub use self::synth::{synth_outliers, OutlierSpec};

/// Samples × features expression matrix with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionDataset {
    x: DMatrix<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    gene_ids: Vec<String>,
    sample_ids: Vec<String>,
    class_names: Vec<String>,
}

impl ExpressionDataset {
    /// Validates shape, finiteness and label coverage. Class ids must cover
    /// `0..n_classes` with every class present at least once.
    pub fn new(
        x: DMatrix<f64>,
        labels: Vec<usize>,
        gene_ids: Vec<String>,
        sample_ids: Vec<String>,
    ) -> Result<Self> {
        let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
        let class_names = (0..n_classes).map(|c| c.to_string()).collect();
        Self::with_class_names(x, labels, gene_ids, sample_ids, class_names)
    }

    pub fn with_class_names(
        x: DMatrix<f64>,
        labels: Vec<usize>,
        gene_ids: Vec<String>,
        sample_ids: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let (n, m) = x.shape();
        if n < 2 {
            return Err(Error::InvalidDataset(format!("need at least 2 samples, got {n}")));
        }
        if m < 1 {
            return Err(Error::InvalidDataset("need at least 1 feature".into()));
        }
        if labels.len() != n {
            return Err(Error::Labeling(format!(
                "{} labels for {n} samples",
                labels.len()
            )));
        }
        if gene_ids.len() != m || sample_ids.len() != n {
            return Err(Error::Shape(format!(
                "{} gene ids / {} sample ids for a {n}x{m} matrix",
                gene_ids.len(),
                sample_ids.len()
            )));
        }
        if let Some((idx, _)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            // column-major storage
            return Err(Error::InvalidDataset(format!(
                "non-finite value at sample {}, feature {}",
                idx % n,
                idx / n
            )));
        }
        let n_classes = class_names.len();
        if n_classes < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 classes, got {n_classes}"
            )));
        }
        let mut seen = vec![false; n_classes];
        for &l in &labels {
            if l >= n_classes {
                return Err(Error::LabelRange {
                    label: l,
                    classes: n_classes,
                });
            }
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Labeling(format!("class {missing} has no samples")));
        }
        Ok(Self {
            x,
            labels,
            n_classes,
            gene_ids,
            sample_ids,
            class_names,
        })
    }

    /// Builds a dataset with generated ids (`g0..`, `s0..`).
    pub fn from_matrix(x: DMatrix<f64>, labels: Vec<usize>) -> Result<Self> {
        let gene_ids = (0..x.ncols()).map(|j| format!("g{j}")).collect();
        let sample_ids = (0..x.nrows()).map(|i| format!("s{i}")).collect();
        Self::new(x, labels, gene_ids, sample_ids)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn gene_ids(&self) -> &[String] {
        &self.gene_ids
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Row subset. Class ids are kept as-is, so the subset may not contain
    /// every class; use [`Self::x`] and [`Self::labels`] for raw access.
    pub fn select_rows(&self, rows: &[usize]) -> (DMatrix<f64>, Vec<usize>) {
        let x = self.x.select_rows(rows.iter());
        let labels = rows.iter().map(|&r| self.labels[r]).collect();
        (x, labels)
    }

    pub fn normalize(&self, mode: Normalization) -> Self {
        let mut out = self.clone();
        normalize_matrix(&mut out.x, mode);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    Minmax,
    Zscore,
    None,
}

/// Per-feature normalization in place. Constant features become all zeros
/// in both modes; z-score uses the population standard deviation.
pub fn normalize_matrix(x: &mut DMatrix<f64>, mode: Normalization) {
    let n = x.nrows() as f64;
    for mut col in x.column_iter_mut() {
        match mode {
            Normalization::None => {}
            Normalization::Minmax => {
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let range = hi - lo;
                if range > 0.0 {
                    col.iter_mut().for_each(|v| *v = (*v - lo) / range);
                } else {
                    col.fill(0.0);
                }
            }
            Normalization::Zscore => {
                let mean = col.sum() / n;
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                let sd = var.sqrt();
                if sd > 0.0 {
                    col.iter_mut().for_each(|v| *v = (*v - mean) / sd);
                } else {
                    col.fill(0.0);
                }
            }
        }
    }
}

/// c × n class indicator: column j has a single 1 at row `labels[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHotMatrix {
    y: DMatrix<f64>,
}

impl OneHotMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn n_classes(&self) -> usize {
        self.y.nrows()
    }

    /// Column-wise argmax, i.e. the labels this matrix encodes.
    pub fn decode(&self) -> Vec<usize> {
        self.y.column_iter().map(|c| c.imax()).collect()
    }
}

pub fn one_hot(labels: &[usize], n_classes: usize) -> Result<OneHotMatrix> {
    let mut y = DMatrix::zeros(n_classes, labels.len());
    for (j, &l) in labels.iter().enumerate() {
        if l >= n_classes {
            return Err(Error::LabelRange {
                label: l,
                classes: n_classes,
            });
        }
        y[(l, j)] = 1.0;
    }
    Ok(OneHotMatrix { y })
}

/// Indicator with the columns of unknown samples left at zero, for fitting
/// with hidden labels.
pub fn one_hot_masked(labels: &[usize], n_classes: usize, known: &[bool]) -> Result<OneHotMatrix> {
    if known.len() != labels.len() {
        return Err(Error::Shape(format!("{} mask entries for {} labels", known.len(), labels.len())));
    }
    let mut oh = one_hot(labels, n_classes)?;
    for (j, &k) in known.iter().enumerate() {
        if !k {
            oh.y.column_mut(j).fill(0.0);
        }
    }
    Ok(oh)
}
