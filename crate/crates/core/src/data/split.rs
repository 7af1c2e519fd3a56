use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Independent random train/test draws, one per repetition.
    #[default]
    Holdout,
    /// `repetitions`-fold cross-validation; `test_fraction` is ignored.
    KFold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub repetitions: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
    #[serde(default)]
    pub mode: SplitMode,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self {
            repetitions: 5,
            test_fraction: 0.2,
            seed: 0,
            stratified: true,
            mode: SplitMode::Holdout,
        }
    }
}

/// Sorted, disjoint train and test indices covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn round_clamped(x: f64, lo: usize, hi: usize) -> usize {
    (x.round() as usize).clamp(lo, hi)
}

pub fn make_splits(labels: &[usize], plan: &SplitPlan) -> Result<Vec<Split>> {
    let n = labels.len();
    if plan.repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::Config(format!("cannot split {n} samples")));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    if plan.stratified {
        if let Some((c, members)) = by_class
            .iter()
            .enumerate()
            .find(|(_, m)| m.len() == 1)
        {
            return Err(Error::Config(format!(
                "class {c} has {} sample; stratified splitting needs at least 2",
                members.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    match plan.mode {
        SplitMode::Holdout => {
            if !(plan.test_fraction > 0.0 && plan.test_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "test_fraction must lie in (0, 1), got {}",
                    plan.test_fraction
                )));
            }
            if plan.test_fraction * (n as f64) < 1.0 {
                return Err(Error::Config(format!(
                    "test_fraction {} leaves no test samples out of {n}",
                    plan.test_fraction
                )));
            }
            (0..plan.repetitions)
                .map(|_| {
                    let mut in_test = vec![false; n];
                    if plan.stratified {
                        for members in by_class.iter().filter(|m| !m.is_empty()) {
                            let mut m = members.clone();
                            m.shuffle(&mut rng);
                            let t = round_clamped(
                                plan.test_fraction * m.len() as f64,
                                1,
                                m.len() - 1,
                            );
                            m[..t].iter().for_each(|&i| in_test[i] = true);
                        }
                    } else {
                        let mut all: Vec<usize> = (0..n).collect();
                        all.shuffle(&mut rng);
                        let t = round_clamped(plan.test_fraction * n as f64, 1, n - 1);
                        all[..t].iter().for_each(|&i| in_test[i] = true);
                    }
                    Ok(partition(&in_test))
                })
                .collect()
        }
        SplitMode::KFold => {
            let folds = plan.repetitions;
            if folds < 2 || folds > n {
                return Err(Error::Config(format!(
                    "k-fold needs 2 <= folds <= n, got {folds} folds for {n} samples"
                )));
            }
            let mut fold_of = vec![0usize; n];
            if plan.stratified {
                // deal each class round-robin, continuing where the last class stopped
                let mut next = 0;
                for members in &by_class {
                    let mut m = members.clone();
                    m.shuffle(&mut rng);
                    for i in m {
                        fold_of[i] = next % folds;
                        next += 1;
                    }
                }
            } else {
                let mut all: Vec<usize> = (0..n).collect();
                all.shuffle(&mut rng);
                for (pos, i) in all.into_iter().enumerate() {
                    fold_of[i] = pos % folds;
                }
            }
            Ok((0..folds)
                .map(|f| partition(&fold_of.iter().map(|&g| g == f).collect::<Vec<_>>()))
                .collect())
        }
    }
}

fn partition(in_test: &[bool]) -> Split {
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, &t) in in_test.iter().enumerate() {
        if t {
            test.push(i);
        } else {
            train.push(i);
        }
    }
    Split { train, test }
}
