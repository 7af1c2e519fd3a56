use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Predicted labels and, per test row, the fraction of neighbor votes each
/// class received (rows sum to one).
#[derive(Debug, Clone, PartialEq)]
pub struct KnnPrediction {
    pub labels: Vec<usize>,
    pub votes: DMatrix<f64>,
}

/// Majority vote over the `k_neighbors` Euclidean-nearest training rows.
///
/// Neighbors at equal distance are taken in index order. A vote tie goes to
/// the class with the smaller summed neighbor distance, then the smaller id.
pub fn knn_predict(
    train: &DMatrix<f64>,
    train_labels: &[usize],
    test: &DMatrix<f64>,
    k_neighbors: usize,
    n_classes: usize,
) -> Result<KnnPrediction> {
    let n_train = train.nrows();
    if n_train == 0 {
        return Err(Error::InvalidDataset("empty training set".into()));
    }
    if train_labels.len() != n_train {
        return Err(Error::Shape(format!("{} labels for {n_train} training rows", train_labels.len())));
    }
    if train.ncols() != test.ncols() {
        return Err(Error::Shape(format!(
            "train has {} columns, test has {}",
            train.ncols(),
            test.ncols()
        )));
    }
    if k_neighbors == 0 || k_neighbors > n_train {
        return Err(Error::Config(format!("k_neighbors = {k_neighbors} outside [1, {n_train}]")));
    }
    if let Some(&l) = train_labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::LabelRange {
            label: l,
            classes: n_classes,
        });
    }

    let mut labels = Vec::with_capacity(test.nrows());
    let mut votes = DMatrix::zeros(test.nrows(), n_classes);
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(n_train);
    for (t, row) in test.row_iter().enumerate() {
        dist.clear();
        dist.extend(train.row_iter().enumerate().map(|(i, r)| ((r - row).norm_squared(), i)));
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut count = vec![0usize; n_classes];
        let mut cum = vec![0.0f64; n_classes];
        for &(d2, i) in &dist[..k_neighbors] {
            count[train_labels[i]] += 1;
            cum[train_labels[i]] += d2.sqrt();
        }
        let best = (0..n_classes)
            .max_by(|&a, &b| {
                count[a]
                    .cmp(&count[b])
                    .then(cum[b].total_cmp(&cum[a]))
                    .then(b.cmp(&a))
            })
            .expect("n_classes >= 1");
        labels.push(best);
        for c in 0..n_classes {
            votes[(t, c)] = count[c] as f64 / k_neighbors as f64;
        }
    }
    Ok(KnnPrediction { labels, votes })
}
