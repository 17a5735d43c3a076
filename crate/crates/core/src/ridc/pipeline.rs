//! Multi-threaded executor: one pipeline of level buffers shared by a pool
//! of workers, each owning a contiguous block of levels.

use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use crate::error::Error;

use super::buffer::{LevelBuffer, NodeValue};
use super::schedule::PipelineProtocol;
use super::step::LevelStepper;
use super::IntervalOutcome;

struct PipeState {
    buffers: Vec<LevelBuffer>,
    claimed: Vec<usize>,
    watermark: Vec<usize>,
    in_progress: usize,
    generation: u64,
    error: Option<Error>,
    trace: Vec<(usize, usize)>,
    trajectory: Vec<Arc<NodeValue>>,
}

struct Shared<'a> {
    state: Mutex<PipeState>,
    cond: Condvar,
    protocol: &'a PipelineProtocol,
    stepper: &'a LevelStepper<'a>,
    timeout: Duration,
    record_trajectory: bool,
}

impl Shared<'_> {
    fn fail(&self, st: &mut PipeState, err: Error) {
        if st.error.is_none() {
            st.error = Some(err);
        }
        st.generation += 1;
        self.cond.notify_all();
    }

    fn any_ready(&self, st: &PipeState) -> bool {
        (0..self.protocol.levels()).any(|j| self.protocol.can_start(j, &st.claimed, &st.watermark))
    }

    fn worker(&self, owned: &[usize]) {
        let steps = self.protocol.steps();
        let mut st = self.state.lock().unwrap();
        loop {
            if st.error.is_some() || owned.iter().all(|&j| st.watermark[j] == steps) {
                return;
            }
            // Higher levels first: their claims free buffer slots below.
            let pick = owned
                .iter()
                .rev()
                .copied()
                .find(|&j| self.protocol.can_start(j, &st.claimed, &st.watermark));
            let Some(j) = pick else {
                st = match self.wait(st) {
                    Some(g) => g,
                    None => return,
                };
                continue;
            };

            let m = st.claimed[j] + 1;
            let own = Arc::clone(st.buffers[j].latest());
            let prev = if j == 0 {
                Vec::new()
            } else {
                let (lo, hi) = LevelStepper::window_bounds(j, m);
                match st.buffers[j - 1].window(lo, hi) {
                    Ok(w) => w,
                    Err(e) => {
                        self.fail(&mut st, e);
                        return;
                    }
                }
            };
            st.claimed[j] = m;
            st.in_progress += 1;
            st.trace.push((j, m));
            st.generation += 1;
            self.cond.notify_all();
            drop(st);

            let result = self.stepper.advance(j, &own, &prev);

            st = self.state.lock().unwrap();
            st.in_progress -= 1;
            let published = result.and_then(|node| {
                let node = Arc::new(node);
                st.buffers[j].publish(Arc::clone(&node))?;
                st.watermark[j] = m;
                if self.record_trajectory && j + 1 == self.protocol.levels() {
                    st.trajectory.push(node);
                }
                Ok(())
            });
            if let Err(e) = published {
                self.fail(&mut st, e);
                return;
            }
            st.generation += 1;
            self.cond.notify_all();
        }
    }

    /// Blocks until the pipeline state changes. Returns `None` after
    /// recording a deadlock.
    fn wait<'g>(&self, mut st: MutexGuard<'g, PipeState>) -> Option<MutexGuard<'g, PipeState>> {
        if st.in_progress == 0
            && !self.any_ready(&st)
            && !self.protocol.finished(&st.claimed, &st.watermark)
        {
            let msg = format!("no level can advance (claimed {:?})", st.claimed);
            self.fail(&mut st, Error::Deadlock(msg));
            return None;
        }
        let generation = st.generation;
        let deadline = Instant::now() + self.timeout;
        while st.generation == generation {
            let now = Instant::now();
            if now >= deadline {
                let msg = format!(
                    "waited {:?} without progress (claimed {:?}, published {:?})",
                    self.timeout, st.claimed, st.watermark
                );
                self.fail(&mut st, Error::Deadlock(msg));
                return None;
            }
            st = self.cond.wait_timeout(st, deadline - now).unwrap().0;
        }
        Some(st)
    }
}

/// Levels owned by each worker: contiguous, as even as possible.
pub(crate) fn assign_levels(levels: usize, workers: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); workers];
    for j in 0..levels {
        out[j * workers / levels].push(j);
    }
    out
}

pub(crate) fn run_interval(
    stepper: &LevelStepper<'_>,
    protocol: &PipelineProtocol,
    workers: usize,
    initial: Arc<NodeValue>,
    record_trajectory: bool,
    timeout: Duration,
) -> crate::Result<IntervalOutcome> {
    let levels = protocol.levels();
    let buffers = (0..levels)
        .map(|j| LevelBuffer::new(j, protocol.capacity(j), Arc::clone(&initial)))
        .collect();
    let shared = Shared {
        state: Mutex::new(PipeState {
            buffers,
            claimed: vec![0; levels],
            watermark: vec![0; levels],
            in_progress: 0,
            generation: 0,
            error: None,
            trace: Vec::with_capacity(levels * protocol.steps()),
            trajectory: Vec::new(),
        }),
        cond: Condvar::new(),
        protocol,
        stepper,
        timeout,
        record_trajectory,
    };
    let owned = assign_levels(levels, workers);
    std::thread::scope(|s| {
        for block in &owned {
            let shared = &shared;
            s.spawn(move || shared.worker(block));
        }
    });

    let st = shared.state.into_inner().unwrap();
    if let Some(e) = st.error {
        return Err(e);
    }
    let mut trajectory = Vec::new();
    if record_trajectory {
        trajectory.push(initial);
        trajectory.extend(st.trajectory);
    }
    Ok(IntervalOutcome {
        finals: st.buffers.iter().map(|b| Arc::clone(b.latest())).collect(),
        peaks: st.buffers.iter().map(LevelBuffer::peak).collect(),
        trace: st.trace,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_assignment() {
        assert_eq!(assign_levels(4, 1), vec![vec![0, 1, 2, 3]]);
        assert_eq!(assign_levels(4, 2), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(
            assign_levels(4, 4),
            vec![vec![0], vec![1], vec![2], vec![3]]
        );
        assert_eq!(assign_levels(5, 3), vec![vec![0, 1], vec![2, 3], vec![4]]);
    }
}
