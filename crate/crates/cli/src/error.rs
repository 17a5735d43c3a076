use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] ridc_core::Error),
    #[error("{0} run(s) failed")]
    RunsFailed(usize),
    #[error("determinism gate failed: {0}")]
    Determinism(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    /// Process exit status: 1 configuration, 2 solver, 3 determinism.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Csv { .. } => 1,
            CliError::Solver(
                ridc_core::Error::Config(_) | ridc_core::Error::InvalidArgument(_),
            ) => 1,
            CliError::Solver(_) | CliError::RunsFailed(_) => 2,
            CliError::Determinism(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
