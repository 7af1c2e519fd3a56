use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[t][p]`: samples of true class `t` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_predictions(truth: &[usize], predicted: &[usize], n_classes: usize) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Shape(format!(
                "{} true labels, {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let mut counts = vec![vec![0u64; n_classes]; n_classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            let bad = if t >= n_classes { Some(t) } else if p >= n_classes { Some(p) } else { None };
            if let Some(label) = bad {
                return Err(Error::LabelRange {
                    label,
                    classes: n_classes,
                });
            }
            counts[t][p] += 1;
        }
        Ok(Self { counts })
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub acc: f64,
    pub macro_rec: f64,
    pub macro_pre: f64,
    pub macro_f1: f64,
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    /// Notes on per-class ratios that were undefined and set to zero.
    pub undefined: Vec<String>,
}

/// Accuracy and macro recall/precision; F1 is the harmonic mean of the two
/// macro aggregates, not the mean of per-class F1.
pub fn macro_metrics(cm: &ConfusionMatrix) -> Result<MacroMetrics> {
    let c = cm.n_classes();
    if c == 0 || cm.counts.iter().any(|r| r.len() != c) {
        return Err(Error::Shape("confusion matrix must be square and non-empty".into()));
    }
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidDataset("confusion matrix has no predictions".into()));
    }
    let mut undefined = Vec::new();
    let mut recall = Vec::with_capacity(c);
    let mut precision = Vec::with_capacity(c);
    let mut diag = 0u64;
    for i in 0..c {
        let tp = cm.counts[i][i];
        diag += tp;
        let actual: u64 = cm.counts[i].iter().sum();
        let predicted: u64 = (0..c).map(|t| cm.counts[t][i]).sum();
        recall.push(if actual == 0 {
            undefined.push(format!("recall of class {i}: no true samples"));
            0.0
        } else {
            tp as f64 / actual as f64
        });
        precision.push(if predicted == 0 {
            undefined.push(format!("precision of class {i}: no predictions"));
            0.0
        } else {
            tp as f64 / predicted as f64
        });
    }
    let macro_rec = recall.iter().sum::<f64>() / c as f64;
    let macro_pre = precision.iter().sum::<f64>() / c as f64;
    let macro_f1 = if macro_rec + macro_pre == 0.0 {
        undefined.push("macro F1: precision and recall both zero".into());
        0.0
    } else {
        2.0 * macro_pre * macro_rec / (macro_pre + macro_rec)
    };
    Ok(MacroMetrics {
        acc: diag as f64 / total as f64,
        macro_rec,
        macro_pre,
        macro_f1,
        recall,
        precision,
        undefined,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AucMode {
    /// Ranks the per-class vote fractions.
    Score,
    /// Binarizes each row to its top class first; equals the mean per-class
    /// balanced accuracy.
    #[default]
    Hard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucResult {
    pub macro_auc: f64,
    pub per_class: Vec<f64>,
    pub undefined: Vec<String>,
}

/// One-vs-rest ROC AUC per class, averaged. A class with no positive or no
/// negative samples has no AUC; it counts as zero and is reported.
pub fn macro_auc(scores: &DMatrix<f64>, truth: &[usize], mode: AucMode) -> Result<AucResult> {
    let (n, c) = scores.shape();
    if truth.len() != n {
        return Err(Error::Shape(format!("{} labels for {n} score rows", truth.len())));
    }
    if let Some(&l) = truth.iter().find(|&&l| l >= c) {
        return Err(Error::LabelRange { label: l, classes: c });
    }
    let binarized;
    let scores = match mode {
        AucMode::Score => scores,
        AucMode::Hard => {
            binarized = DMatrix::from_fn(n, c, |i, j| {
                // first maximal column
                let row = scores.row(i);
                let top = (0..c).fold(0, |b, k| if row[k] > row[b] { k } else { b });
                if j == top {
                    1.0
                } else {
                    0.0
                }
            });
            &binarized
        }
    };
    let mut undefined = Vec::new();
    let per_class: Vec<f64> = (0..c)
        .map(|k| {
            let pos: Vec<f64> = (0..n).filter(|&i| truth[i] == k).map(|i| scores[(i, k)]).collect();
            let neg: Vec<f64> = (0..n).filter(|&i| truth[i] != k).map(|i| scores[(i, k)]).collect();
            if pos.is_empty() || neg.is_empty() {
                undefined.push(format!("AUC of class {k}: needs positive and negative samples"));
                return 0.0;
            }
            rank_auc(&pos, &neg)
        })
        .collect();
    Ok(AucResult {
        macro_auc: per_class.iter().sum::<f64>() / c.max(1) as f64,
        per_class,
        undefined,
    })
}

/// Probability that a positive outranks a negative, ties counting one half.
fn rank_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut neg = neg.to_vec();
    neg.sort_by(f64::total_cmp);
    let mut wins = 0.0;
    for &p in pos {
        let below = neg.partition_point(|&v| v < p);
        let not_above = neg.partition_point(|&v| v <= p);
        wins += below as f64 + 0.5 * (not_above - below) as f64;
    }
    wins / (pos.len() as f64 * neg.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: &[&[u64]]) -> ConfusionMatrix {
        ConfusionMatrix {
            counts: rows.iter().map(|r| r.to_vec()).collect(),
        }
    }

    #[test]
    fn worked_example() {
        let m = macro_metrics(&cm(&[&[1, 1], &[0, 2]])).unwrap();
        assert_eq!(m.recall, vec![0.5, 1.0]);
        assert!((m.precision[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.macro_rec - 0.75).abs() < 1e-15);
        assert!((m.macro_pre - 5.0 / 6.0).abs() < 1e-15);
        assert!((m.macro_f1 - 15.0 / 19.0).abs() < 1e-15);
        assert!((m.acc - 0.75).abs() < 1e-15);
    }

    #[test]
    fn perfect_and_degenerate() {
        let m = macro_metrics(&cm(&[&[3, 0], &[0, 4]])).unwrap();
        assert_eq!((m.acc, m.macro_rec, m.macro_pre, m.macro_f1), (1.0, 1.0, 1.0, 1.0));
        let m = macro_metrics(&cm(&[&[5, 0], &[5, 0]])).unwrap();
        assert_eq!(m.macro_rec, 0.5);
        assert_eq!(m.undefined.len(), 1);
        assert!(macro_metrics(&cm(&[&[0, 0], &[0, 0]])).is_err());
    }

    #[test]
    fn confusion_rows_are_truth() {
        let c = ConfusionMatrix::from_predictions(&[0, 0, 1], &[1, 0, 1], 2).unwrap();
        assert_eq!(c.counts, vec![vec![1, 1], vec![0, 1]]);
    }

    #[test]
    fn hard_auc_is_balanced_accuracy() {
        // confusion [[1,1],[0,2]] as one-hot predictions
        let truth = [0, 0, 1, 1];
        let pred = [0, 1, 1, 1];
        let s = DMatrix::from_fn(4, 2, |i, j| if pred[i] == j { 1.0 } else { 0.0 });
        let r = macro_auc(&s, &truth, AucMode::Hard).unwrap();
        // class 0: TPR 0.5, FPR 0 → 0.75; class 1: TPR 1, FPR 0.5 → 0.75
        assert_eq!(r.per_class, vec![0.75, 0.75]);
        let perfect = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]);
        assert_eq!(macro_auc(&perfect, &[0, 1], AucMode::Score).unwrap().macro_auc, 1.0);
        assert_eq!(macro_auc(&perfect, &[0, 1], AucMode::Hard).unwrap().macro_auc, 1.0);
    }

    #[test]
    fn single_class_truth_flagged() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let r = macro_auc(&s, &[0, 0], AucMode::Score).unwrap();
        assert_eq!(r.macro_auc, 0.0);
        assert_eq!(r.undefined.len(), 2);
    }
}
