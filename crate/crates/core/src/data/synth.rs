use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ExpressionDataset;
use crate::error::{Error, Result};

/// Two unit-variance Gaussian classes plus far-away labelled outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierSpec {
    pub n_per_class: usize,
    pub dims: usize,
    pub n_outliers: usize,
    /// Distance between the two class means, in units of the per-axis sd.
    pub separation: f64,
    pub seed: u64,
}

impl Default for OutlierSpec {
    fn default() -> Self {
        Self {
            n_per_class: 80,
            dims: 20,
            n_outliers: 2,
            separation: 6.0,
            seed: 0,
        }
    }
}

impl OutlierSpec {
    /// Typical distance of a cluster member from its mean.
    pub fn spread(&self) -> f64 {
        (self.dims as f64).sqrt()
    }
}

fn gaussian(rng: &mut ChaCha8Rng, dims: usize) -> DVector<f64> {
    DVector::from_iterator(dims, (0..dims).map(|_| StandardNormal.sample(rng)))
}

/// Cluster members are resampled until they lie within 3× spread of their
/// mean; outlier `i` gets label `i % 2` and sits 6× spread from its own mean,
/// on the side facing away from the other class, so it is at least 5× spread
/// from both means.
pub fn synth_outliers(spec: &OutlierSpec) -> Result<ExpressionDataset> {
    if spec.n_per_class < 10 {
        return Err(Error::Config(format!(
            "n_per_class must be at least 10, got {}",
            spec.n_per_class
        )));
    }
    if spec.dims == 0 {
        return Err(Error::Config("dims must be at least 1".into()));
    }
    if !spec.separation.is_finite() || spec.separation < 0.0 {
        return Err(Error::Config(format!("invalid separation {}", spec.separation)));
    }
    let d = spec.dims;
    let spread = spec.spread();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let axis = DVector::from_element(d, 1.0 / (d as f64).sqrt());
    let means = [DVector::zeros(d), &axis * spec.separation];

    let n = 2 * spec.n_per_class + spec.n_outliers;
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (class, mean) in means.iter().enumerate() {
        for _ in 0..spec.n_per_class {
            let z = loop {
                let z = gaussian(&mut rng, d);
                if z.norm() <= 3.0 * spread {
                    break z;
                }
            };
            rows.push(mean + z);
            labels.push(class);
        }
    }
    for i in 0..spec.n_outliers {
        let class = i % 2;
        // unit vector pointing away from the other class
        let away = if class == 0 { -&axis } else { axis.clone() };
        let u = loop {
            let mut u = gaussian(&mut rng, d);
            let along = u.dot(&away);
            if along < 0.0 {
                u -= &away * (2.0 * along);
            }
            let norm = u.norm();
            if norm > 1e-12 {
                break u / norm;
            }
        };
        rows.push(&means[class] + u * (6.0 * spread));
        labels.push(class);
    }

    let x = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let gene_ids = (0..d).map(|j| format!("f{j}")).collect();
    let sample_ids = (0..n).map(|i| format!("s{i}")).collect();
    ExpressionDataset::new(x, labels, gene_ids, sample_ids)
}
