use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ridc_cli::config::{parse_fraction, parse_list};
use ridc_cli::output::{format_rows, format_speedup};
use ridc_cli::{
    available_parallelism, emit_csv, run_convergence, run_restart_study, run_speedup, CliError,
    CliResult, StudyConfig, StudyReport,
};

#[derive(Parser)]
#[command(
    name = "ridc",
    version,
    about = "Convergence, restart and speedup studies for RIDC integrators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error against a fine reference for a sweep of step counts.
    Converge(Common),
    /// Wall time of the pipelined executor for several worker counts.
    Speedup(Common),
    /// Error at a fixed step count for several restart counts.
    Restarts(Common),
}

#[derive(Args)]
struct Common {
    /// Key-value configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// adv-diff or burgers.
    #[arg(long)]
    problem: Option<String>,
    /// fbe, imex3, imex4, ridc4-fbe or ridc-p.
    #[arg(long)]
    scheme: Option<String>,
    /// Comma-separated, strictly increasing step counts.
    #[arg(long)]
    steps: Option<String>,
    /// Worker count (comma-separated list for `speedup`).
    #[arg(long)]
    workers: Option<String>,
    /// Restart count (comma-separated list for `restarts`).
    #[arg(long)]
    restarts: Option<String>,
    /// Grid spacing, decimal or `1/n`.
    #[arg(long)]
    dx: Option<String>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Norm for the observed order: inf or l2.
    #[arg(long)]
    norm: Option<String>,
    /// Reference steps per finest study step.
    #[arg(long)]
    refinement: Option<usize>,
    /// Full-resolution problem instead of the desk-scale default.
    #[arg(long = "paper-scale", visible_alias = "full-scale")]
    full_scale: bool,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Resolved {
    cfg: StudyConfig,
    workers: Option<Vec<usize>>,
    restarts: Option<Vec<usize>>,
}

fn single(name: &str, list: &Option<Vec<usize>>) -> CliResult<Option<usize>> {
    match list.as_deref() {
        None => Ok(None),
        Some([v]) => Ok(Some(*v)),
        Some(_) => Err(CliError::Config(format!(
            "--{name} takes a single value here"
        ))),
    }
}

impl Common {
    fn resolve(&self) -> CliResult<Resolved> {
        let mut cfg = match &self.config {
            Some(path) => StudyConfig::from_file(path)?,
            None => StudyConfig::default(),
        };
        if let Some(v) = &self.problem {
            cfg.problem = v.parse()?;
        }
        if let Some(v) = &self.scheme {
            cfg.scheme = v.parse()?;
        }
        if let Some(v) = &self.steps {
            cfg.steps = parse_list("steps", v)?;
        }
        if let Some(v) = &self.dx {
            cfg.dx = Some(parse_fraction("dx", v)?);
        }
        if let Some(v) = self.t_end {
            cfg.t_end = Some(v);
        }
        if let Some(v) = &self.norm {
            cfg.norm = v.parse()?;
        }
        if let Some(v) = self.refinement {
            cfg.refinement = v;
        }
        if self.full_scale {
            cfg.full_scale = true;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        let workers = self
            .workers
            .as_deref()
            .map(|v| parse_list("workers", v))
            .transpose()?;
        let restarts = self
            .restarts
            .as_deref()
            .map(|v| parse_list("restarts", v))
            .transpose()?;
        Ok(Resolved {
            cfg,
            workers,
            restarts,
        })
    }
}

fn finish(report: &StudyReport, cfg: &StudyConfig) -> CliResult<()> {
    print!("{}", format_rows(&report.rows));
    if let Some(path) = &cfg.out {
        emit_csv(&report.rows, path)?;
    }
    for f in &report.failures {
        eprintln!("failed: {f}");
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::RunsFailed(report.failures.len()))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Converge(common) => {
            let Resolved {
                mut cfg,
                workers,
                restarts,
            } = common.resolve()?;
            if let Some(w) = single("workers", &workers)? {
                cfg.workers = w;
            } else if let Some(p) = cfg.scheme.levels() {
                cfg.workers = p.min(available_parallelism());
            }
            if let Some(r) = single("restarts", &restarts)? {
                cfg.restarts = r;
            }
            let report = run_convergence(&cfg)?;
            finish(&report, &cfg)
        }
        Command::Restarts(common) => {
            let Resolved {
                mut cfg,
                workers,
                restarts,
            } = common.resolve()?;
            if let Some(w) = single("workers", &workers)? {
                cfg.workers = w;
            }
            let counts = restarts.unwrap_or_else(|| vec![1, 2, 5, 10]);
            let report = run_restart_study(&cfg, &counts)?;
            finish(&report, &cfg)
        }
        Command::Speedup(common) => {
            let Resolved {
                mut cfg,
                workers,
                restarts,
            } = common.resolve()?;
            if let Some(r) = single("restarts", &restarts)? {
                cfg.restarts = r;
            }
            let counts = workers.unwrap_or_else(|| {
                let cap = cfg
                    .scheme
                    .levels()
                    .unwrap_or(1)
                    .min(available_parallelism());
                std::iter::successors(Some(1usize), |w| Some(w * 2))
                    .take_while(|&w| w <= cap)
                    .collect()
            });
            let table = run_speedup(&cfg, &counts)?;
            print!("{}", format_speedup(&table));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
