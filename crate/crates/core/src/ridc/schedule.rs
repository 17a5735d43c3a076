//! Dependency rules of the RIDC pipeline.
//!
//! Level `j` advancing to index `m` reads level `j - 1` at indices
//! `lowest_index(j, m)..=required_index(j, m)`. Level `j` may not publish a
//! node that would evict one its reader still has to read. Together these
//! rules fix the start-up staircase: level `j` starts after
//! `startup_delay(j)` computing steps, then every level advances one step per
//! tick, each one index behind the level below.

use crate::error::{Error, Result};

/// Computing steps level `j` waits before its first step: `j (j + 1) / 2`.
pub fn startup_delay(j: usize) -> usize {
    j * (j + 1) / 2
}

/// Highest index of level `j - 1` read by level `j` when computing index `m`.
pub fn required_index(j: usize, m: usize) -> usize {
    // Start-up steps (n = m - 1 < j - 1) use the left-anchored stencil 0..=j.
    if m < j {
        j
    } else {
        m
    }
}

/// Lowest index of level `j - 1` read by level `j` when computing index `m`.
pub fn lowest_index(j: usize, m: usize) -> usize {
    m.saturating_sub(j)
}

/// Readiness rules for a pipeline of `levels` levels marching `steps` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineProtocol {
    levels: usize,
    steps: usize,
    capacity: Vec<usize>,
}

impl PipelineProtocol {
    pub fn new(levels: usize, steps: usize) -> Self {
        Self::with_capacities(levels, steps, (0..levels).map(|j| j + 2).collect())
    }

    pub fn with_capacities(levels: usize, steps: usize, capacity: Vec<usize>) -> Self {
        assert_eq!(capacity.len(), levels);
        Self {
            levels,
            steps,
            capacity,
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn capacity(&self, level: usize) -> usize {
        self.capacity[level]
    }

    /// Whether level `j` may claim its next index.
    ///
    /// `claimed[j]` is the highest index level `j` has started (or finished);
    /// `watermark[j]` the highest it has published.
    pub fn can_start(&self, j: usize, claimed: &[usize], watermark: &[usize]) -> bool {
        let m = claimed[j] + 1;
        if m > self.steps || watermark[j] != claimed[j] {
            return false;
        }
        if j > 0 && watermark[j - 1] < required_index(j, m) {
            return false;
        }
        if j + 1 < self.levels && m >= self.capacity[j] {
            let evicted = m - self.capacity[j];
            let reader_next = claimed[j + 1] + 1;
            if reader_next <= self.steps && lowest_index(j + 1, reader_next) <= evicted {
                return false;
            }
        }
        true
    }

    pub fn finished(&self, claimed: &[usize], watermark: &[usize]) -> bool {
        claimed.iter().chain(watermark).all(|&c| c == self.steps)
    }

    /// Lock-step execution: at every tick each ready level computes one
    /// step. Levels are visited top-down so a level can reuse a slot its
    /// reader claims in the same tick.
    pub fn simulate(&self) -> Result<ScheduleTrace> {
        let mut claimed = vec![0; self.levels];
        let mut watermark = vec![0; self.levels];
        let mut ticks = Vec::new();
        while !self.finished(&claimed, &watermark) {
            let mut tick = Vec::new();
            for j in (0..self.levels).rev() {
                if self.can_start(j, &claimed, &watermark) {
                    claimed[j] += 1;
                    tick.push((j, claimed[j]));
                }
            }
            if tick.is_empty() {
                return Err(Error::Deadlock(format!(
                    "no level can advance (claimed {claimed:?})"
                )));
            }
            for &(j, m) in &tick {
                watermark[j] = m;
            }
            tick.reverse();
            ticks.push(tick);
        }
        Ok(ScheduleTrace { ticks })
    }
}

/// `(level, index)` pairs computed at each tick, lowest level first.
/// Tick `k` of the vector is computing step `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleTrace {
    pub ticks: Vec<Vec<(usize, usize)>>,
}

impl ScheduleTrace {
    /// Computing step (1-based) at which `level` computes `index`.
    pub fn tick_of(&self, level: usize, index: usize) -> Option<usize> {
        self.ticks
            .iter()
            .position(|t| t.contains(&(level, index)))
            .map(|p| p + 1)
    }

    /// Number of ticks during which `level` sat idle before its first step.
    pub fn initial_wait(&self, level: usize) -> Option<usize> {
        self.tick_of(level, 1).map(|t| t - 1)
    }
}
