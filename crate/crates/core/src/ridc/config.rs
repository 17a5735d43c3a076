use std::time::Duration;

use crate::error::{Error, Result};

/// Highest supported order; equispaced interpolation beyond this invites
/// Runge oscillations in the correction quadrature.
pub const MAX_LEVELS: usize = 12;

/// Parameters of one RIDC run.
#[derive(Debug, Clone, PartialEq)]
pub struct RidcConfig {
    /// Number of levels `p`: one predictor plus `p - 1` correctors. The
    /// method is order `p`.
    pub levels: usize,
    /// Total number of uniform steps over `[t_start, t_end]`.
    pub steps: usize,
    /// Number of equal sub-intervals; each restarts every level from the
    /// previous sub-interval's most corrected solution. `1` means no restart.
    pub restarts: usize,
    /// Threads used by the pipelined executor, at most `levels`.
    pub workers: usize,
    /// Keep the top level's state at every step.
    pub record_trajectory: bool,
    /// A worker that waits this long without any level publishing reports a
    /// deadlock.
    pub wait_timeout: Duration,
}

impl RidcConfig {
    pub fn new(levels: usize, steps: usize) -> Self {
        Self {
            levels,
            steps,
            restarts: 1,
            workers: levels,
            record_trajectory: false,
            wait_timeout: Duration::from_secs(30),
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_trajectory(mut self, record: bool) -> Self {
        self.record_trajectory = record;
        self
    }

    pub fn with_wait_timeout(mut self, timeout: Duration) -> Self {
        self.wait_timeout = timeout;
        self
    }

    /// Steps in each restart interval.
    pub fn steps_per_interval(&self) -> usize {
        self.steps / self.restarts.max(1)
    }

    /// Smallest interval that lets every level leave start-up.
    pub fn min_steps_per_interval(levels: usize) -> usize {
        levels * (levels + 1) / 2 + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.levels > MAX_LEVELS {
            return Err(Error::Config(format!(
                "levels must be in 1..={MAX_LEVELS}, got {}",
                self.levels
            )));
        }
        if self.workers == 0 || self.workers > self.levels {
            return Err(Error::Config(format!(
                "workers must be in 1..={}, got {}",
                self.levels, self.workers
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restart count must be at least 1".into()));
        }
        if self.steps % self.restarts != 0 {
            return Err(Error::Config(format!(
                "{} steps cannot be split into {} equal restart intervals",
                self.steps, self.restarts
            )));
        }
        let need = Self::min_steps_per_interval(self.levels);
        if self.steps_per_interval() < need {
            return Err(Error::Config(format!(
                "{} steps per interval is too short for {} levels (need at least {need})",
                self.steps_per_interval(),
                self.levels
            )));
        }
        Ok(())
    }
}

/// One restart sub-interval on the global uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    /// Global index of the interval's first grid node.
    pub first_step: usize,
}

/// Splits `[t_start, t_end]` into `restarts` intervals of `total_steps / restarts`
/// steps each. All intervals share the step `(t_end - t_start) / total_steps`;
/// interval endpoints are grid nodes `t_start + k dt`.
pub fn restart_partition(
    t_start: f64,
    t_end: f64,
    restarts: usize,
    total_steps: usize,
) -> Result<Vec<Interval>> {
    if restarts == 0 || total_steps == 0 {
        return Err(Error::Config(
            "restart and step counts must be positive".into(),
        ));
    }
    if total_steps % restarts != 0 {
        return Err(Error::Config(format!(
            "{total_steps} steps cannot be split into {restarts} equal restart intervals"
        )));
    }
    if !(t_start < t_end) {
        return Err(Error::Config(format!(
            "empty time interval [{t_start}, {t_end}]"
        )));
    }
    let per = total_steps / restarts;
    let dt = (t_end - t_start) / total_steps as f64;
    Ok((0..restarts)
        .map(|r| {
            let first = r * per;
            let last = first + per;
            Interval {
                t_start: t_start + first as f64 * dt,
                t_end: if last == total_steps {
                    t_end
                } else {
                    t_start + last as f64 * dt
                },
                steps: per,
                first_step: first,
            }
        })
        .collect())
}
