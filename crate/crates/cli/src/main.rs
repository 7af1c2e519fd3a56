//! `plpca` command-line driver.

mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plpca::reduction::Method;
use serde_json::{json, Value};

use crate::config::{merge, read_config_file, resolve, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "plpca", version, about = "Persistent-Laplacian regularized PCA toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Fit one method on the whole dataset and write the learned factors.
    Reduce,
    /// Sweep dimensions over repeated splits and write the metric table.
    Evaluate,
    /// Evaluate every combination of the configured parameter grids.
    Gridsearch,
    /// Compare methods on synthetic data with 2, 4 and 8 outliers.
    BenchOutliers,
    /// Write residue-similarity scores for the first split.
    Rs,
    /// Write a synthetic outlier dataset as CSV.
    Synth,
}

#[derive(Args)]
struct Common {
    /// TOML or JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named hyperparameter preset.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Method or comma-separated methods.
    #[arg(long, global = true, value_delimiter = ',')]
    method: Vec<String>,
    /// Comma-separated subspace dimensions.
    #[arg(long, global = true, value_delimiter = ',')]
    dims: Vec<usize>,
    /// Target dimension for `reduce` and `rs`.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Expression CSV (overrides the configured dataset path).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
}

fn flag_overrides(c: &Common) -> CliResult<Value> {
    let mut v = json!({});
    if let Some(seed) = c.seed {
        merge(&mut v, json!({ "plan": { "seed": seed }, "synth": { "seed": seed } }));
    }
    if !c.method.is_empty() {
        let methods = c
            .method
            .iter()
            .map(|m| Method::parse(m).ok_or_else(|| CliError::Config(format!("unknown method {m:?}"))))
            .collect::<CliResult<Vec<_>>>()?;
        merge(&mut v, json!({ "methods": methods, "solver": { "method": methods[0] } }));
    }
    if !c.dims.is_empty() {
        merge(&mut v, json!({ "dims": c.dims, "bench": { "dims": c.dims } }));
    }
    if let Some(k) = c.k {
        merge(&mut v, json!({ "solver": { "k": k }, "rs_k": k }));
    }
    if let Some(path) = &c.data {
        merge(&mut v, json!({ "dataset": { "path": path } }));
    }
    Ok(v)
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(j) = cli.common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let file = cli.common.config.as_deref().map(read_config_file).transpose()?;
    let cfg: RunConfig = resolve(file, cli.common.preset.as_deref(), flag_overrides(&cli.common)?)?;
    let out: &Path = cli
        .common
        .out
        .as_deref()
        .ok_or_else(|| CliError::Config("--out is required".into()))?;
    match cli.command {
        Command::Reduce => commands::reduce(&cfg, out),
        Command::Evaluate => commands::evaluate(&cfg, out),
        Command::Gridsearch => commands::gridsearch(&cfg, out),
        Command::BenchOutliers => commands::bench_outliers(&cfg, out),
        Command::Rs => commands::rs(&cfg, out),
        Command::Synth => commands::synth(&cfg, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            eprintln!("error[config]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
