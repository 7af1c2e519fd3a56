use serde::{Deserialize, Serialize};

use super::sweep::{sweep_dimensions, EvalReport, SweepOptions};
use crate::data::{synth_outliers, Normalization, OutlierSpec};
use crate::error::Result;
use crate::reduction::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n_outliers: usize,
    pub report: EvalReport,
}

/// Runs every method on synthetic two-class data for each outlier count.
pub fn outlier_benchmark(
    base: &OutlierSpec,
    outlier_counts: &[usize],
    methods: &[SolverConfig],
    opts: &SweepOptions,
    normalization: Normalization,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(outlier_counts.len() * methods.len());
    for &n_outliers in outlier_counts {
        let spec = OutlierSpec {
            n_outliers,
            ..base.clone()
        };
        let ds = synth_outliers(&spec)?.normalize(normalization);
        for cfg in methods {
            rows.push(BenchRow {
                n_outliers,
                report: sweep_dimensions(&ds, cfg, opts)?,
            });
        }
    }
    Ok(rows)
}

/// `Outliers,Method,Mean ACC,...` rows in benchmark order.
pub fn bench_table_csv(rows: &[BenchRow]) -> String {
    let mut s = format!("Outliers,{}\n", super::sweep::TABLE_HEADER);
    for r in rows {
        s.push_str(&format!("{},{}\n", r.n_outliers, r.report.table_row()));
    }
    s
}
