use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ExpressionDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Rows are genes, columns are samples; first column holds gene ids.
    #[default]
    GenesBySamples,
    /// Rows are samples, columns are genes; first column holds sample ids.
    SamplesByGenes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaderMode {
    /// Header present iff some cell of the first row after the id column
    /// does not parse as a number.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    /// One-column file (labels in sample order, optional header) or
    /// two-column file (`sample_id,label`, matched by id).
    File(PathBuf),
    /// A named column (samples_by_genes) or a row whose id matches
    /// (genes_by_samples) inside the data file itself.
    Column(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub orientation: Orientation,
    #[serde(default)]
    pub header: HeaderMode,
    pub labels: LabelSource,
}

struct Table {
    /// (1-based line, fields)
    rows: Vec<(usize, Vec<String>)>,
}

fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            match e.into_kind() {
                ::csv::ErrorKind::Io(io) => Error::io(path, io),
                other => Error::Parse {
                    row: line,
                    col: 0,
                    message: format!("{other:?}"),
                },
            }
        })?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let line = rec.position().map_or(rows.len() + 1, |p| p.line() as usize);
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(Table { rows })
}

fn parse_cell(s: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::Parse {
        row,
        col,
        message: format!("non-numeric cell {s:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            row,
            col,
            message: format!("non-finite value {s:?}"),
        });
    }
    Ok(v)
}

/// Reads an expression CSV into a samples × features dataset.
pub fn ingest_csv(path: &Path, opts: &IngestOptions) -> Result<ExpressionDataset> {
    let table = read_table(path)?;
    if table.rows.is_empty() {
        return Err(Error::InvalidDataset(format!("{} is empty", path.display())));
    }
    let width = table.rows[0].1.len();
    for (line, fields) in &table.rows {
        if fields.len() != width {
            return Err(Error::Ragged {
                row: *line,
                found: fields.len(),
                expected: width,
            });
        }
    }
    if width < 2 {
        return Err(Error::InvalidDataset(
            "need an id column and at least one value column".into(),
        ));
    }

    let has_header = match opts.header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => table.rows[0].1[1..]
            .iter()
            .any(|c| c.parse::<f64>().is_err()),
    };
    let (header, body) = if has_header {
        (Some(&table.rows[0].1), &table.rows[1..])
    } else {
        (None, &table.rows[..])
    };

    // Optional in-file label line/column.
    let label_col_name = match &opts.labels {
        LabelSource::Column(name) => Some(name.as_str()),
        LabelSource::File(_) => None,
    };

    match opts.orientation {
        Orientation::GenesBySamples => {
            let sample_ids: Vec<String> = match header {
                Some(h) => h[1..].to_vec(),
                None => (0..width - 1).map(|j| format!("s{j}")).collect(),
            };
            let mut gene_ids = Vec::new();
            let mut values = Vec::new();
            let mut in_file_labels = None;
            for (line, fields) in body {
                if Some(fields[0].as_str()) == label_col_name {
                    in_file_labels = Some(fields[1..].to_vec());
                    continue;
                }
                gene_ids.push(fields[0].clone());
                for (j, cell) in fields[1..].iter().enumerate() {
                    values.push(parse_cell(cell, *line, j + 2)?);
                }
            }
            let n = sample_ids.len();
            let m = gene_ids.len();
            // values are gene-major, which is column-major for samples × genes
            let x = DMatrix::from_vec(n, m, values);
            let raw = resolve_labels(&opts.labels, in_file_labels, &sample_ids)?;
            finish(x, raw, gene_ids, sample_ids)
        }
        Orientation::SamplesByGenes => {
            let names: Vec<String> = match header {
                Some(h) => h[1..].to_vec(),
                None => (0..width - 1).map(|j| format!("g{j}")).collect(),
            };
            let label_idx = match label_col_name {
                Some(name) => Some(names.iter().position(|h| h == name).ok_or_else(|| {
                    Error::Labeling(format!("no column named {name:?}"))
                })?),
                None => None,
            };
            let gene_ids: Vec<String> = names
                .iter()
                .enumerate()
                .filter(|(j, _)| Some(*j) != label_idx)
                .map(|(_, g)| g.clone())
                .collect();
            let mut sample_ids = Vec::new();
            let mut rows = Vec::new();
            let mut in_file = Vec::new();
            for (line, fields) in body {
                sample_ids.push(fields[0].clone());
                for (j, cell) in fields[1..].iter().enumerate() {
                    if Some(j) == label_idx {
                        in_file.push(cell.clone());
                    } else {
                        rows.push(parse_cell(cell, *line, j + 2)?);
                    }
                }
            }
            let n = sample_ids.len();
            let m = gene_ids.len();
            let x = DMatrix::from_row_slice(n, m, &rows);
            let in_file = label_idx.map(|_| in_file);
            let raw = resolve_labels(&opts.labels, in_file, &sample_ids)?;
            finish(x, raw, gene_ids, sample_ids)
        }
    }
}

fn resolve_labels(
    source: &LabelSource,
    in_file: Option<Vec<String>>,
    sample_ids: &[String],
) -> Result<Vec<String>> {
    match source {
        LabelSource::Column(name) => {
            in_file.ok_or_else(|| Error::Labeling(format!("label line {name:?} not found")))
        }
        LabelSource::File(path) => read_label_file(path, sample_ids),
    }
}

fn read_label_file(path: &Path, sample_ids: &[String]) -> Result<Vec<String>> {
    let table = read_table(path)?;
    let n = sample_ids.len();
    let width = table.rows.first().map_or(0, |r| r.1.len());
    match width {
        1 => {
            let vals: Vec<String> = table.rows.iter().map(|r| r.1[0].clone()).collect();
            match vals.len() {
                l if l == n => Ok(vals),
                l if l == n + 1 => Ok(vals[1..].to_vec()),
                l => Err(Error::Labeling(format!("{l} labels for {n} samples"))),
            }
        }
        2 => {
            let index: HashMap<&str, usize> = sample_ids
                .iter()
                .enumerate()
                .map(|(i, s)| (s.as_str(), i))
                .collect();
            let mut out: Vec<Option<String>> = vec![None; n];
            for (k, (line, fields)) in table.rows.iter().enumerate() {
                if fields.len() != 2 {
                    return Err(Error::Ragged {
                        row: *line,
                        found: fields.len(),
                        expected: 2,
                    });
                }
                match index.get(fields[0].as_str()) {
                    Some(&i) => out[i] = Some(fields[1].clone()),
                    None if k == 0 => {} // header
                    None => {
                        return Err(Error::Labeling(format!(
                            "row {line}: unknown sample id {:?}",
                            fields[0]
                        )))
                    }
                }
            }
            out.into_iter()
                .enumerate()
                .map(|(i, l)| {
                    l.ok_or_else(|| {
                        Error::Labeling(format!("no label for sample {:?}", sample_ids[i]))
                    })
                })
                .collect()
        }
        w => Err(Error::Labeling(format!(
            "label file must have 1 or 2 columns, found {w}"
        ))),
    }
}

/// Integer labels are used as class ids directly; anything else is mapped
/// to ids in sorted name order.
fn encode_labels(raw: &[String]) -> Result<(Vec<usize>, Vec<String>)> {
    if let Some(i) = raw.iter().position(|l| l.is_empty()) {
        return Err(Error::Labeling(format!("empty label for sample {i}")));
    }
    if let Ok(ids) = raw.iter().map(|l| l.parse::<usize>()).collect::<std::result::Result<Vec<_>, _>>() {
        let c = ids.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; c];
        ids.iter().for_each(|&i| seen[i] = true);
        if let Some(gap) = seen.iter().position(|s| !s) {
            return Err(Error::Labeling(format!(
                "numeric labels must cover 0..{c}; class {gap} never appears"
            )));
        }
        return Ok((ids, (0..c).map(|i| i.to_string()).collect()));
    }
    let names: Vec<String> = raw.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let ids = raw
        .iter()
        .map(|l| names.binary_search(l).expect("name collected above"))
        .collect();
    Ok((ids, names))
}

fn finish(
    x: DMatrix<f64>,
    raw: Vec<String>,
    gene_ids: Vec<String>,
    sample_ids: Vec<String>,
) -> Result<ExpressionDataset> {
    if raw.len() != sample_ids.len() {
        return Err(Error::Labeling(format!(
            "{} labels for {} samples",
            raw.len(),
            sample_ids.len()
        )));
    }
    let (labels, names) = encode_labels(&raw)?;
    ExpressionDataset::with_class_names(x, labels, gene_ids, sample_ids, names)
}

/// Writes `data_path` in the requested orientation (with a header row and an
/// id column) and a two-column `sample_id,label` file at `labels_path`.
pub fn write_csv(
    ds: &ExpressionDataset,
    data_path: &Path,
    labels_path: &Path,
    orientation: Orientation,
) -> Result<()> {
    let mut out = String::new();
    match orientation {
        Orientation::GenesBySamples => {
            out.push_str("gene_id");
            for s in ds.sample_ids() {
                out.push(',');
                out.push_str(s);
            }
            out.push('\n');
            for (j, g) in ds.gene_ids().iter().enumerate() {
                out.push_str(g);
                for v in ds.x().column(j).iter() {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
        }
        Orientation::SamplesByGenes => {
            out.push_str("sample_id");
            for g in ds.gene_ids() {
                out.push(',');
                out.push_str(g);
            }
            out.push('\n');
            for (i, s) in ds.sample_ids().iter().enumerate() {
                out.push_str(s);
                for v in ds.x().row(i).iter() {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
        }
    }
    write_file(data_path, out.as_bytes())?;

    let mut labels = String::from("sample_id,label\n");
    for (s, &l) in ds.sample_ids().iter().zip(ds.labels()) {
        labels.push_str(&format!("{s},{}\n", ds.class_names()[l]));
    }
    write_file(labels_path, labels.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    crate::io::write_atomic(path, bytes)
}
