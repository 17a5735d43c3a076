//! Study drivers for the RIDC integrators: convergence sweeps, restart
//! sweeps and strong-scaling runs, with CSV output.

pub mod config;
pub mod error;
pub mod output;
pub mod study;

pub use config::{available_parallelism, Norm, Problem, Scheme, StudyConfig, PARALLELISM_ENV};
pub use error::{CliError, CliResult};
pub use output::{emit_csv, read_csv, CSV_HEADER};
pub use study::{
    build_problem, error_norms, integrate, run_convergence, run_restart_study, run_speedup,
    ResultRow, SpeedupRow, SpeedupTable, StudyReport,
};
