//! Convergence, speedup and restart studies.

use std::time::{Duration, Instant};

use ridc_core::imex::{imex3_tableau, imex4_tableau, integrate_ark, integrate_fbe, prefactor_ark};
use ridc_core::mol::{reference_solution, AdvectionDiffusionSpec, BurgersSpec};
use ridc_core::ridc::{run_pipelined, run_serial, RidcConfig};
use ridc_core::{ImplicitSolver, SplitIvp};

use crate::config::{available_parallelism, Norm, Problem, Scheme, StudyConfig};
use crate::error::{CliError, CliResult};

/// One line of a study table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: String,
    pub steps: usize,
    pub dt: f64,
    /// `None` marks a failed run.
    pub error_inf: Option<f64>,
    pub error_l2: Option<f64>,
    pub wall_ms: f64,
    pub workers: usize,
    pub restarts: usize,
    /// Slope against the previous row.
    pub observed_order: Option<f64>,
}

impl ResultRow {
    pub fn failed(&self) -> bool {
        self.error_inf.is_none()
    }

    pub fn error(&self, norm: Norm) -> Option<f64> {
        match norm {
            Norm::Inf => self.error_inf,
            Norm::L2 => self.error_l2,
        }
    }
}

/// Rows plus the messages of any runs that failed.
#[derive(Debug, Clone, Default)]
pub struct StudyReport {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<String>,
}

/// A benchmark problem resolved from a configuration.
pub struct ProblemSetup {
    pub ivp: SplitIvp,
    pub dx: f64,
}

pub fn build_problem(cfg: &StudyConfig) -> CliResult<ProblemSetup> {
    match cfg.problem {
        Problem::AdvectionDiffusion => {
            let mut spec = if cfg.full_scale {
                AdvectionDiffusionSpec::full()
            } else {
                AdvectionDiffusionSpec::desk()
            };
            spec.dx = cfg.dx.unwrap_or(spec.dx);
            spec.t_end = cfg.t_end.unwrap_or(spec.t_end);
            Ok(ProblemSetup {
                ivp: spec.build()?.ivp,
                dx: spec.dx,
            })
        }
        Problem::Burgers => {
            let mut spec = if cfg.full_scale {
                BurgersSpec::full()
            } else {
                BurgersSpec::desk()
            };
            spec.dx = cfg.dx.unwrap_or(spec.dx);
            spec.t_end = cfg.t_end.unwrap_or(spec.t_end);
            Ok(ProblemSetup {
                ivp: spec.build()?.ivp,
                dx: spec.dx,
            })
        }
    }
}

/// Final state of `scheme` after `steps` uniform steps and the time spent
/// integrating (factorizations excluded).
pub fn integrate(
    ivp: &SplitIvp,
    scheme: Scheme,
    steps: usize,
    workers: usize,
    restarts: usize,
    solver: &ImplicitSolver,
) -> CliResult<(Vec<f64>, Duration)> {
    let dt = (ivp.t_end() - ivp.t_start()) / steps as f64;
    let timed = |f: &dyn Fn() -> ridc_core::Result<Vec<f64>>| -> CliResult<(Vec<f64>, Duration)> {
        let start = Instant::now();
        let y = f()?;
        Ok((y, start.elapsed()))
    };
    if restarts != 1 && scheme.levels().is_none() {
        return Err(CliError::Config(format!(
            "scheme {scheme} does not support restarts"
        )));
    }
    match scheme {
        Scheme::Fbe => {
            solver.prefactor(ivp, dt)?;
            timed(&|| integrate_fbe(ivp, steps, solver))
        }
        Scheme::Imex3 | Scheme::Imex4 => {
            let tab = if scheme == Scheme::Imex3 {
                imex3_tableau()
            } else {
                imex4_tableau()
            };
            prefactor_ark(ivp, &tab, dt, solver)?;
            timed(&|| integrate_ark(ivp, &tab, steps, solver))
        }
        Scheme::Ridc(p) => {
            let config = RidcConfig::new(p, steps)
                .with_workers(workers.min(p))
                .with_restarts(restarts);
            let sol = run_pipelined(ivp, &config, solver)?;
            Ok((sol.final_state, sol.wall_time))
        }
    }
}

/// Discrete max norm and `dx`-weighted 2-norm of `a - b`.
pub fn error_norms(a: &[f64], b: &[f64], dx: f64) -> (f64, f64) {
    let inf = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let l2 = (dx * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).sqrt();
    (inf, l2)
}

/// Pairwise slopes `log(e_prev / e_cur) / log(n_cur / n_prev)`.
fn fill_orders(rows: &mut [ResultRow], norm: Norm) {
    for i in 1..rows.len() {
        let (prev, cur) = (&rows[i - 1], &rows[i]);
        rows[i].observed_order = match (prev.error(norm), cur.error(norm)) {
            (Some(ep), Some(ec)) if ep > 0.0 && ec > 0.0 => {
                Some((ep / ec).ln() / (cur.steps as f64 / prev.steps as f64).ln())
            }
            _ => None,
        };
    }
}

fn check_workers(cfg: &StudyConfig) -> CliResult<()> {
    if let Some(p) = cfg.scheme.levels() {
        if cfg.workers > p {
            return Err(CliError::Config(format!(
                "{} workers exceed the {p} levels of {}",
                cfg.workers, cfg.scheme
            )));
        }
    } else if cfg.workers != 1 {
        return Err(CliError::Config(format!(
            "scheme {} runs on a single worker",
            cfg.scheme
        )));
    }
    Ok(())
}

/// Error at `t_end` for every step count against a fine IMEX4 reference.
///
/// A failing run leaves its error columns empty and is listed in
/// [`StudyReport::failures`]; the sweep continues.
pub fn run_convergence(cfg: &StudyConfig) -> CliResult<StudyReport> {
    cfg.validate()?;
    check_workers(cfg)?;
    let setup = build_problem(cfg)?;
    let solver = ImplicitSolver::new();
    let finest = *cfg.steps.last().expect("validated non-empty");
    let reference = reference_solution(
        &setup.ivp,
        setup.ivp.t_end(),
        finest,
        cfg.refinement,
        &solver,
    )?;

    let mut report = StudyReport::default();
    for &steps in &cfg.steps {
        let dt = (setup.ivp.t_end() - setup.ivp.t_start()) / steps as f64;
        let mut row = ResultRow {
            scheme: cfg.scheme.to_string(),
            steps,
            dt,
            error_inf: None,
            error_l2: None,
            wall_ms: 0.0,
            workers: cfg.workers,
            restarts: cfg.restarts,
            observed_order: None,
        };
        match integrate(
            &setup.ivp,
            cfg.scheme,
            steps,
            cfg.workers,
            cfg.restarts,
            &solver,
        ) {
            Ok((y, wall)) => {
                let (inf, l2) = error_norms(&y, &reference, setup.dx);
                row.error_inf = Some(inf);
                row.error_l2 = Some(l2);
                row.wall_ms = wall.as_secs_f64() * 1e3;
            }
            Err(e) => report
                .failures
                .push(format!("{} with {steps} steps: {e}", cfg.scheme)),
        }
        report.rows.push(row);
    }
    fill_orders(&mut report.rows, cfg.norm);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub workers: usize,
    /// Median over the repetitions.
    pub wall_ms: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupTable {
    pub scheme: String,
    pub steps: usize,
    pub restarts: usize,
    pub rows: Vec<SpeedupRow>,
}

pub const SPEEDUP_REPETITIONS: usize = 3;

/// Strong scaling of the pipelined executor at the largest configured step
/// count. Every run must reproduce the serial result bit for bit before any
/// timing is reported.
pub fn run_speedup(cfg: &StudyConfig, worker_counts: &[usize]) -> CliResult<SpeedupTable> {
    cfg.validate()?;
    let Some(levels) = cfg.scheme.levels() else {
        return Err(CliError::Config(format!(
            "speedup needs an RIDC scheme, got {}",
            cfg.scheme
        )));
    };
    if worker_counts.is_empty() || worker_counts.contains(&0) {
        return Err(CliError::Config("worker counts must be positive".into()));
    }
    let cores = available_parallelism();
    let max = *worker_counts.iter().max().expect("non-empty");
    if max > cores || max > levels {
        return Err(CliError::Config(format!(
            "{max} workers exceed the available parallelism ({cores}) or the level count ({levels})"
        )));
    }
    let steps = *cfg.steps.last().expect("validated non-empty");
    let setup = build_problem(cfg)?;
    let solver = ImplicitSolver::new();
    let base = RidcConfig::new(levels, steps).with_restarts(cfg.restarts);
    let serial = run_serial(&setup.ivp, &base, &solver)?.final_state;

    let mut timings = Vec::with_capacity(worker_counts.len());
    for &w in worker_counts {
        let config = base.clone().with_workers(w);
        let mut walls = Vec::with_capacity(SPEEDUP_REPETITIONS);
        for rep in 0..SPEEDUP_REPETITIONS {
            let sol = run_pipelined(&setup.ivp, &config, &solver)?;
            if !bitwise_equal(&sol.final_state, &serial) {
                return Err(CliError::Determinism(format!(
                    "{w} workers (repetition {}) differ from the serial result",
                    rep + 1
                )));
            }
            walls.push(sol.wall_time.as_secs_f64() * 1e3);
        }
        walls.sort_by(f64::total_cmp);
        timings.push((w, walls[walls.len() / 2]));
    }

    let one = timings.iter().find(|(w, _)| *w == 1).map(|&(_, t)| t);
    let rows = timings
        .into_iter()
        .map(|(workers, wall_ms)| SpeedupRow {
            workers,
            wall_ms,
            speedup: one.map_or(f64::NAN, |t1| t1 / wall_ms),
        })
        .collect();
    Ok(SpeedupTable {
        scheme: cfg.scheme.to_string(),
        steps,
        restarts: cfg.restarts,
        rows,
    })
}

pub fn bitwise_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Error at `t_end` for each restart count at the largest configured step count.
pub fn run_restart_study(cfg: &StudyConfig, restart_counts: &[usize]) -> CliResult<StudyReport> {
    cfg.validate()?;
    check_workers(cfg)?;
    let Some(levels) = cfg.scheme.levels() else {
        return Err(CliError::Config(format!(
            "restart study needs an RIDC scheme, got {}",
            cfg.scheme
        )));
    };
    let steps = *cfg.steps.last().expect("validated non-empty");
    let need = RidcConfig::min_steps_per_interval(levels);
    for &r in restart_counts {
        if r == 0 || steps % r != 0 {
            return Err(CliError::Config(format!(
                "{r} restarts do not divide {steps} steps"
            )));
        }
        if steps / r < need {
            return Err(CliError::Config(format!(
                "{r} restarts leave {} steps per interval; {levels} levels need at least {need}",
                steps / r
            )));
        }
    }
    let setup = build_problem(cfg)?;
    let solver = ImplicitSolver::new();
    let reference = reference_solution(
        &setup.ivp,
        setup.ivp.t_end(),
        steps,
        cfg.refinement,
        &solver,
    )?;
    let dt = (setup.ivp.t_end() - setup.ivp.t_start()) / steps as f64;

    let mut report = StudyReport::default();
    for &r in restart_counts {
        let mut row = ResultRow {
            scheme: cfg.scheme.to_string(),
            steps,
            dt,
            error_inf: None,
            error_l2: None,
            wall_ms: 0.0,
            workers: cfg.workers,
            restarts: r,
            observed_order: None,
        };
        match integrate(&setup.ivp, cfg.scheme, steps, cfg.workers, r, &solver) {
            Ok((y, wall)) => {
                let (inf, l2) = error_norms(&y, &reference, setup.dx);
                row.error_inf = Some(inf);
                row.error_l2 = Some(l2);
                row.wall_ms = wall.as_secs_f64() * 1e3;
            }
            Err(e) => report.failures.push(format!("{r} restarts: {e}")),
        }
        report.rows.push(row);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(steps: usize, err: Option<f64>) -> ResultRow {
        ResultRow {
            scheme: "fbe".into(),
            steps,
            dt: 1.0 / steps as f64,
            error_inf: err,
            error_l2: err,
            wall_ms: 0.0,
            workers: 1,
            restarts: 1,
            observed_order: None,
        }
    }

    #[test]
    fn orders_from_pairs() {
        let mut rows = vec![
            row(100, Some(1e-2)),
            row(200, Some(2.5e-3)),
            row(400, None),
            row(800, Some(1e-5)),
        ];
        fill_orders(&mut rows, Norm::Inf);
        assert_eq!(rows[0].observed_order, None);
        assert!((rows[1].observed_order.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(rows[2].observed_order, None);
        assert_eq!(rows[3].observed_order, None);
    }

    #[test]
    fn norms() {
        let (inf, l2) = error_norms(&[1.0, 2.0, 3.0], &[1.0, 1.0, 5.0], 0.25);
        assert_eq!(inf, 2.0);
        assert!((l2 - (0.25f64 * 5.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn restart_counts_checked_up_front() {
        let cfg = StudyConfig {
            steps: vec![100],
            dx: Some(0.05),
            ..StudyConfig::default()
        };
        assert!(matches!(
            run_restart_study(&cfg, &[3]),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            run_restart_study(&cfg, &[100]),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn single_restart_matches_plain_run() {
        let cfg = StudyConfig {
            steps: vec![40],
            dx: Some(0.05),
            t_end: Some(0.5),
            ..StudyConfig::default()
        };
        let report = run_restart_study(&cfg, &[1, 2]).unwrap();
        let setup = build_problem(&cfg).unwrap();
        let solver = ImplicitSolver::new();
        let (plain, _) = integrate(&setup.ivp, cfg.scheme, 40, 1, 1, &solver).unwrap();
        let reference = reference_solution(&setup.ivp, 0.5, 40, 8, &solver).unwrap();
        let (inf, _) = error_norms(&plain, &reference, 0.05);
        assert_eq!(report.rows[0].error_inf.unwrap().to_bits(), inf.to_bits());
    }

    #[test]
    fn failures_are_recorded_per_row() {
        // 50 steps are far beyond the stability limit of the explicit Burgers flux.
        let cfg = StudyConfig {
            problem: Problem::Burgers,
            scheme: Scheme::Fbe,
            steps: vec![50, 800],
            ..StudyConfig::default()
        };
        let report = run_convergence(&cfg).unwrap();
        assert!(report.rows[0].failed());
        assert!(!report.rows[1].failed());
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.rows[1].observed_order, None);
    }

    #[test]
    fn speedup_rejects_oversubscription() {
        let cfg = StudyConfig {
            steps: vec![100],
            dx: Some(0.05),
            ..StudyConfig::default()
        };
        assert!(matches!(
            run_speedup(&cfg, &[1, 64]),
            Err(CliError::Config(_))
        ));
        let cfg = StudyConfig {
            scheme: Scheme::Fbe,
            ..cfg
        };
        assert!(matches!(run_speedup(&cfg, &[1]), Err(CliError::Config(_))));
    }

    #[test]
    fn speedup_single_worker() {
        let cfg = StudyConfig {
            steps: vec![60],
            dx: Some(0.05),
            t_end: Some(0.5),
            ..StudyConfig::default()
        };
        let table = run_speedup(&cfg, &[1]).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].speedup, 1.0);
    }
}
