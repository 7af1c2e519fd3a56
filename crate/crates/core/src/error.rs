use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// `row` and `col` are 1-based positions in the source file.
    #[error("parse error at row {row}, col {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("ragged csv: row {row} has {found} fields, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("labeling error: {0}")]
    Labeling(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("class id {label} out of range for {classes} classes")]
    LabelRange { label: usize, classes: usize },

    #[error("complexes are not nested: simplex {simplex:?} is missing from the larger complex")]
    Inclusion { simplex: Vec<usize> },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("numerical failure at iteration {iteration}: {message}")]
    Numerical { iteration: usize, message: String },

    #[error("repetition {repetition}, k = {k}: {source}")]
    Cell {
        repetition: usize,
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } | Error::Ragged { .. } => "parse",
            Error::Labeling(_) | Error::LabelRange { .. } => "labeling",
            Error::InvalidDataset(_) => "dataset",
            Error::Config(_) => "config",
            Error::Shape(_) => "shape",
            Error::Inclusion { .. } => "inclusion",
            Error::NotSymmetric { .. } | Error::Numerical { .. } => "numerical",
            Error::Cell { source, .. } => source.category(),
            Error::Serde(_) => "serde",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
