//! KNN classification in the reduced space, macro metrics, R-S scores and
//! the repeated-split dimension sweep.

mod knn;
mod metrics;
mod outliers;
mod rs;
mod sweep;

pub use knn::{knn_predict, KnnPrediction};
pub use metrics::{macro_auc, macro_metrics, AucMode, AucResult, ConfusionMatrix, MacroMetrics};
pub use outliers::{bench_table_csv, outlier_benchmark, BenchRow};
pub use rs::{rs_scores, RsScores};
pub use sweep::{
    default_dims, feasible_default_dims, sweep_dimensions, table_csv, CellResult, DimensionResult,
    EvalMode, EvalReport, Scores, SweepOptions, TABLE_HEADER,
};
