use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residue and similarity per sample. Classes come from the true labels;
/// `predicted` is carried along for coloring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsScores {
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub true_labels: Vec<usize>,
    pub predicted: Vec<usize>,
    /// Largest raw residue per class id (zero for absent classes).
    pub r_max: Vec<f64>,
    pub d_max: f64,
}

pub fn rs_scores(projected: &DMatrix<f64>, labels: &[usize], predicted: &[usize]) -> Result<RsScores> {
    let n = projected.nrows();
    if labels.len() != n || predicted.len() != n {
        return Err(Error::Shape(format!(
            "{n} rows, {} labels, {} predictions",
            labels.len(),
            predicted.len()
        )));
    }
    let c = labels.iter().max().map_or(0, |&l| l + 1);
    let mut dist = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let d = (projected.row(i) - projected.row(j)).norm();
            dist[(i, j)] = d;
            dist[(j, i)] = d;
        }
    }
    let d_max = dist.iter().copied().fold(0.0, f64::max);

    let raw: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| labels[j] != labels[i]).map(|j| dist[(i, j)]).sum())
        .collect();
    let mut r_max = vec![0.0f64; c];
    for i in 0..n {
        r_max[labels[i]] = r_max[labels[i]].max(raw[i]);
    }
    let r = (0..n)
        .map(|i| {
            let m = r_max[labels[i]];
            if m > 0.0 {
                raw[i] / m
            } else {
                0.0
            }
        })
        .collect();
    let s = (0..n)
        .map(|i| {
            if d_max == 0.0 {
                return 1.0;
            }
            let members: Vec<usize> = (0..n).filter(|&j| labels[j] == labels[i]).collect();
            let sum: f64 = members.iter().map(|&j| 1.0 - dist[(i, j)] / d_max).sum();
            sum / members.len() as f64
        })
        .collect();
    Ok(RsScores {
        r,
        s,
        true_labels: labels.to_vec(),
        predicted: predicted.to_vec(),
        r_max,
        d_max,
    })
}

impl RsScores {
    /// `sample_id,R,S,true,predicted` rows.
    pub fn to_csv(&self, sample_ids: &[String]) -> String {
        let mut out = String::from("sample_id,R,S,true,predicted\n");
        for i in 0..self.r.len() {
            let id = sample_ids.get(i).cloned().unwrap_or_else(|| i.to_string());
            out.push_str(&format!(
                "{id},{},{},{},{}\n",
                self.r[i], self.s[i], self.true_labels[i], self.predicted[i]
            ));
        }
        out
    }
}
