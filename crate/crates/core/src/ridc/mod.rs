//! Revisionist integral deferred correction with forward-backward Euler
//! predictors and correctors (RIDC-FBE).
//!
//! Level 0 marches the split problem with [`predict_step`]. Level `j >= 1`
//! marches [`correct_step`], which solves the error equation for the
//! level-`(j-1)` solution and raises the order by one. Levels run
//! concurrently, each lagging the one below by a step once start-up is over.
//!
//! [`run_serial`] computes whole levels one after another; [`run_pipelined`]
//! runs them on a worker pool through bounded [`LevelBuffer`]s. Every step
//! depends only on published immutable nodes, so both produce bitwise
//! identical results for any worker count.

mod buffer;
mod config;
mod pipeline;
pub mod schedule;
mod step;

use std::sync::Arc;
use std::time::{Duration, Instant};

pub use buffer::{LevelBuffer, NodeValue};
pub use config::{restart_partition, Interval, RidcConfig, MAX_LEVELS};
pub use schedule::{startup_delay, PipelineProtocol, ScheduleTrace};
pub use step::{correct_step, predict_step, TimeGrid};

use crate::error::Result;
use crate::imex::ImplicitSolver;
use crate::ivp::SplitIvp;
use step::LevelStepper;

/// One computed step: `level` produced node `index` in restart `interval`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepEvent {
    pub interval: usize,
    pub level: usize,
    pub index: usize,
}

#[derive(Debug, Clone)]
pub struct RidcSolution {
    /// Highest level at `t_end`.
    pub final_state: Vec<f64>,
    /// Every level at `t_end`, predictor first.
    pub level_final_states: Vec<Vec<f64>>,
    pub wall_time: Duration,
    /// `(t, state)` of the highest level at every grid node, when requested.
    pub trajectory: Option<Vec<(f64, Vec<f64>)>>,
    /// Steps in the order they were started.
    pub trace: Vec<StepEvent>,
    /// Largest number of nodes any interval kept per level.
    pub peak_buffer: Vec<usize>,
}

pub(crate) struct IntervalOutcome {
    finals: Vec<Arc<NodeValue>>,
    peaks: Vec<usize>,
    trace: Vec<(usize, usize)>,
    trajectory: Vec<Arc<NodeValue>>,
}

fn run_intervals<F>(
    ivp: &SplitIvp,
    config: &RidcConfig,
    solver: &ImplicitSolver,
    mut run: F,
) -> Result<RidcSolution>
where
    F: FnMut(&LevelStepper<'_>, &PipelineProtocol, Arc<NodeValue>) -> Result<IntervalOutcome>,
{
    config.validate()?;
    let intervals = restart_partition(ivp.t_start(), ivp.t_end(), config.restarts, config.steps)?;
    let dt = (ivp.t_end() - ivp.t_start()) / config.steps as f64;
    solver.prefactor(ivp, dt)?;
    let protocol = PipelineProtocol::new(config.levels, config.steps_per_interval());

    let started = Instant::now();
    let mut state = ivp.initial_state().to_vec();
    let mut trace = Vec::with_capacity(config.levels * config.steps);
    let mut trajectory = config.record_trajectory.then(Vec::new);
    let mut peak_buffer = vec![0; config.levels];
    let mut level_final_states = Vec::new();

    for (r, iv) in intervals.iter().enumerate() {
        let grid = TimeGrid { t0: iv.t_start, dt };
        let stepper = LevelStepper::new(ivp, config.levels, grid, solver)?;
        let initial = Arc::new(NodeValue::evaluate(ivp, 0, iv.t_start, state)?);
        let out = run(&stepper, &protocol, initial)?;

        trace.extend(out.trace.iter().map(|&(level, index)| StepEvent {
            interval: r,
            level,
            index,
        }));
        for (p, q) in peak_buffer.iter_mut().zip(&out.peaks) {
            *p = (*p).max(*q);
        }
        if let Some(traj) = trajectory.as_mut() {
            let skip = usize::from(r > 0);
            traj.extend(
                out.trajectory
                    .iter()
                    .skip(skip)
                    .map(|n| (grid.time(n.index), n.state.clone())),
            );
        }
        level_final_states = out.finals.iter().map(|n| n.state.clone()).collect();
        state = level_final_states
            .last()
            .expect("at least one level")
            .clone();
    }

    Ok(RidcSolution {
        final_state: state,
        level_final_states,
        wall_time: started.elapsed(),
        trajectory,
        trace,
        peak_buffer,
    })
}

/// Reference executor: each level over the whole interval before the next.
pub fn run_serial(
    ivp: &SplitIvp,
    config: &RidcConfig,
    solver: &ImplicitSolver,
) -> Result<RidcSolution> {
    let record = config.record_trajectory;
    run_intervals(ivp, config, solver, |stepper, protocol, initial| {
        let steps = protocol.steps();
        let mut prev: Vec<Arc<NodeValue>> = Vec::new();
        let mut finals = Vec::new();
        let mut trace = Vec::new();
        for j in 0..protocol.levels() {
            let mut cur = Vec::with_capacity(steps + 1);
            cur.push(Arc::clone(&initial));
            for m in 1..=steps {
                let window = if j == 0 {
                    &[][..]
                } else {
                    let (lo, hi) = LevelStepper::window_bounds(j, m);
                    &prev[lo..=hi]
                };
                let node = stepper.advance(j, &cur[m - 1], window)?;
                cur.push(Arc::new(node));
                trace.push((j, m));
            }
            finals.push(Arc::clone(&cur[steps]));
            prev = cur;
        }
        Ok(IntervalOutcome {
            finals,
            peaks: vec![steps + 1; protocol.levels()],
            trace,
            trajectory: if record { prev } else { Vec::new() },
        })
    })
}

/// Pipelined executor on `config.workers` threads.
pub fn run_pipelined(
    ivp: &SplitIvp,
    config: &RidcConfig,
    solver: &ImplicitSolver,
) -> Result<RidcSolution> {
    run_intervals(ivp, config, solver, |stepper, protocol, initial| {
        pipeline::run_interval(
            stepper,
            protocol,
            config.workers,
            initial,
            config.record_trajectory,
            config.wait_timeout,
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::linalg::DenseMatrix;
    use crate::quadrature::{startup_weights, steady_weights};

    fn decay_ivp() -> SplitIvp {
        SplitIvp::with_linear_stiff_matrix(
            0.0,
            1.0,
            vec![1.0],
            |_, _| vec![0.0],
            DenseMatrix::new(1, 1, vec![-1.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn predictor_matches_fbe() {
        let ivp = decay_ivp();
        let solver = ImplicitSolver::new();
        let grid = TimeGrid { t0: 0.0, dt: 0.5 };
        let start = NodeValue::evaluate(&ivp, 0, 0.0, vec![1.0]).unwrap();
        let next = predict_step(&ivp, &grid, &start, &solver).unwrap();
        let fbe = crate::imex::fbe_step(&ivp, 0.0, &[1.0], 0.5, &solver).unwrap();
        assert_eq!(next.state[0].to_bits(), fbe[0].to_bits());
        assert!((next.state[0] - 2.0 / 3.0).abs() <= 1e-15);
        let again = ivp.eval_stiff(0.5, &next.state).unwrap();
        assert!((again[0] - next.f_stiff[0]).abs() <= 1e-14);
        assert_eq!(next.index, 1);
    }

    #[test]
    fn predictor_fixed_point() {
        let ivp = SplitIvp::new(0.0, 1.0, vec![3.0], |_, _| vec![0.0], |_, _| vec![0.0]).unwrap();
        let solver = ImplicitSolver::new();
        let grid = TimeGrid { t0: 0.0, dt: 0.1 };
        let start = NodeValue::evaluate(&ivp, 0, 0.0, vec![3.0]).unwrap();
        assert_eq!(
            predict_step(&ivp, &grid, &start, &solver).unwrap().state,
            vec![3.0]
        );
    }

    #[test]
    fn corrector_zero_rhs_fixed_point() {
        let ivp = SplitIvp::new(0.0, 1.0, vec![2.0], |_, _| vec![0.0], |_, _| vec![0.0]).unwrap();
        let solver = ImplicitSolver::new();
        let grid = TimeGrid { t0: 0.0, dt: 0.1 };
        let n0 = Arc::new(NodeValue::evaluate(&ivp, 0, 0.0, vec![2.0]).unwrap());
        let n1 = Arc::new(NodeValue::evaluate(&ivp, 1, 0.1, vec![2.0]).unwrap());
        let w = steady_weights(1, 0.1).unwrap();
        let out = correct_step(1, &ivp, &grid, &n0, &[n0.clone(), n1], &w, &solver).unwrap();
        assert_eq!(out.state, vec![2.0]);
    }

    #[test]
    fn corrector_matches_dense_reimplementation() {
        // y' = -y, level 1 from exact level-0 values at t_0, t_1.
        let ivp = decay_ivp();
        let solver = ImplicitSolver::new();
        let dt = 0.2;
        let grid = TimeGrid { t0: 0.0, dt };
        let e1 = (-dt).exp();
        let p0 = Arc::new(NodeValue::evaluate(&ivp, 0, 0.0, vec![1.0]).unwrap());
        let p1 = Arc::new(NodeValue::evaluate(&ivp, 1, dt, vec![e1]).unwrap());
        let w = steady_weights(1, dt).unwrap();
        let out = correct_step(1, &ivp, &grid, &p0, &[p0.clone(), p1], &w, &solver).unwrap();

        // Independent: (1 + dt) x = 1 + dt * e1 - 0 + dt/2 * (-e1 - 1)   [f^N = 0, f^S = -y]
        let rhs = 1.0 + dt * e1 + 0.5 * dt * (-e1 - 1.0);
        let expect = rhs / (1.0 + dt);
        assert!(
            (out.state[0] - expect).abs() <= 1e-15,
            "{} vs {expect}",
            out.state[0]
        );
    }

    #[test]
    fn corrector_reports_missing_window() {
        let ivp = decay_ivp();
        let solver = ImplicitSolver::new();
        let grid = TimeGrid { t0: 0.0, dt: 0.1 };
        let p0 = Arc::new(NodeValue::evaluate(&ivp, 0, 0.0, vec![1.0]).unwrap());
        let w = steady_weights(1, 0.1).unwrap();
        let err =
            correct_step(1, &ivp, &grid, &p0, std::slice::from_ref(&p0), &w, &solver).unwrap_err();
        assert!(matches!(err, Error::Protocol(_)));
        let w3 = startup_weights(3, 0, 0.1).unwrap();
        assert!(
            correct_step(1, &ivp, &grid, &p0, std::slice::from_ref(&p0), &w3, &solver).is_err()
        );
    }

    #[test]
    fn one_level_is_plain_fbe() {
        let ivp = decay_ivp();
        let solver = ImplicitSolver::new();
        let sol = run_serial(&ivp, &RidcConfig::new(1, 20), &solver).unwrap();
        let fbe = crate::imex::integrate_fbe(&ivp, 20, &solver).unwrap();
        assert_eq!(sol.final_state[0].to_bits(), fbe[0].to_bits());
    }

    #[test]
    fn pipelined_matches_serial_bitwise() {
        let ivp = SplitIvp::new(
            0.0,
            2.0,
            vec![1.0, 0.5],
            |t, y| vec![t.sin() * y[1], -0.3 * y[0]],
            |_, y| vec![-y[0], -2.0 * y[1]],
        )
        .unwrap()
        .with_stiff_operator(DenseMatrix::new(2, 2, vec![-1.0, 0.0, 0.0, -2.0]).unwrap())
        .unwrap();
        let solver = ImplicitSolver::new();
        for p in [1usize, 2, 3, 4, 6] {
            let steps = 4 * RidcConfig::min_steps_per_interval(p);
            let base = RidcConfig::new(p, steps).with_restarts(2);
            let serial = run_serial(&ivp, &base, &solver).unwrap();
            for w in 1..=p {
                let par = run_pipelined(&ivp, &base.clone().with_workers(w), &solver).unwrap();
                for (a, b) in serial
                    .level_final_states
                    .iter()
                    .flatten()
                    .zip(par.level_final_states.iter().flatten())
                {
                    assert_eq!(a.to_bits(), b.to_bits(), "p={p} workers={w}");
                }
                assert!(par.peak_buffer.iter().enumerate().all(|(j, &k)| k <= j + 2));
            }
        }
    }

    #[test]
    fn solver_failure_cancels_pipeline() {
        let ivp = SplitIvp::new(
            0.0,
            1.0,
            vec![1.0],
            |t, y| vec![if t > 0.5 { f64::NAN } else { -y[0] }],
            |_, y| vec![-y[0]],
        )
        .unwrap();
        let solver = ImplicitSolver::new();
        let err = run_pipelined(&ivp, &RidcConfig::new(3, 40), &solver).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }), "{err:?}");
    }

    #[test]
    fn undersized_buffers_are_diagnosed_as_deadlock() {
        let ivp = decay_ivp();
        let solver = ImplicitSolver::new();
        let protocol = PipelineProtocol::with_capacities(3, 20, vec![1, 2, 3]);
        let grid = TimeGrid { t0: 0.0, dt: 0.05 };
        let stepper = LevelStepper::new(&ivp, 3, grid, &solver).unwrap();
        let initial = Arc::new(NodeValue::evaluate(&ivp, 0, 0.0, vec![1.0]).unwrap());
        for workers in [1, 3] {
            let res = pipeline::run_interval(
                &stepper,
                &protocol,
                workers,
                initial.clone(),
                false,
                Duration::from_secs(5),
            );
            assert!(matches!(res, Err(Error::Deadlock(_))));
        }
    }

    #[test]
    fn trajectory_covers_every_node() {
        let ivp = decay_ivp();
        let solver = ImplicitSolver::new();
        let cfg = RidcConfig::new(3, 40)
            .with_restarts(2)
            .with_trajectory(true);
        let par = run_pipelined(&ivp, &cfg, &solver).unwrap();
        let ser = run_serial(&ivp, &cfg, &solver).unwrap();
        let tp = par.trajectory.unwrap();
        let ts = ser.trajectory.unwrap();
        assert_eq!(tp.len(), 41);
        assert_eq!(tp, ts);
        assert_eq!(tp.last().unwrap().1, par.final_state);
        assert!((tp[20].0 - 0.5).abs() < 1e-15);
    }
}
