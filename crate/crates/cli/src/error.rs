use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] plpca::Error),

    #[error("{0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Some grid cells failed; their rows were still written.
    #[error("{failed} of {total} runs failed")]
    Partial { failed: usize, total: usize },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Partial { .. } => "partial",
        }
    }

    /// 2 configuration, 3 i/o, 4 data, 5 numerical, 6 partial failure.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" | "serde" => 2,
            "io" => 3,
            "numerical" => 5,
            "partial" => 6,
            _ => 4,
        }
    }
}
