use std::sync::Arc;

use crate::error::{Error, Result};
use crate::imex::{fbe_step_with, ImplicitSolver};
use crate::ivp::SplitIvp;
use crate::quadrature::{QuadratureWeights, WeightTable};

use super::buffer::NodeValue;
use super::schedule::{lowest_index, required_index};

/// Uniform grid `t_n = t0 + n dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }
}

/// Prediction (level 0): one forward-backward Euler step from `prev`.
pub fn predict_step(
    ivp: &SplitIvp,
    grid: &TimeGrid,
    prev: &NodeValue,
    solver: &ImplicitSolver,
) -> Result<NodeValue> {
    let n = prev.index;
    let state = fbe_step_with(
        ivp,
        grid.time(n),
        &prev.state,
        &prev.f_nonstiff,
        grid.dt,
        solver,
    )?;
    NodeValue::evaluate(ivp, n + 1, grid.time(n + 1), state)
}

fn lookup(window: &[Arc<NodeValue>], index: usize, level: usize) -> Result<&NodeValue> {
    let first = window
        .first()
        .ok_or_else(|| Error::Protocol(format!("empty window from level {}", level - 1)))?
        .index;
    index
        .checked_sub(first)
        .and_then(|off| window.get(off))
        .map(|n| n.as_ref())
        .filter(|n| n.index == index)
        .ok_or_else(|| {
            Error::Protocol(format!(
                "level {level} needs index {index} of level {} which is not in its window",
                level - 1
            ))
        })
}

/// Correction level `j`: one first-order IMEX step of the error equation,
/// written directly for `eta^[j]`:
///
/// ```text
/// eta_{n+1} - dt f^S(t_{n+1}, eta_{n+1}) = eta_n + dt f^N(t_n, eta_n)
///     - dt f^S(t_{n+1}, prev_{n+1}) - dt f^N(t_n, prev_n)
///     + sum_k w_k f(t_k, prev_k)
/// ```
///
/// `own` is this level's node `n`; `prev` holds level `j - 1` nodes in
/// ascending, consecutive index order covering the stencil and `n + 1`.
#[allow(clippy::too_many_arguments)]
pub fn correct_step(
    level: usize,
    ivp: &SplitIvp,
    grid: &TimeGrid,
    own: &NodeValue,
    prev: &[Arc<NodeValue>],
    weights: &QuadratureWeights,
    solver: &ImplicitSolver,
) -> Result<NodeValue> {
    if level == 0 || weights.level() != level {
        return Err(Error::InvalidArgument(format!(
            "correction level {level} given weights for level {}",
            weights.level()
        )));
    }
    let n = own.index;
    let dt = grid.dt;
    let prev_n = lookup(prev, n, level)?;
    let prev_next = lookup(prev, n + 1, level)?;

    let mut rhs: Vec<f64> = (0..own.state.len())
        .map(|i| {
            own.state[i] + dt * own.f_nonstiff[i]
                - dt * prev_next.f_stiff[i]
                - dt * prev_n.f_nonstiff[i]
        })
        .collect();
    let mut quad = vec![0.0; rhs.len()];
    for (k, w) in weights.weights().iter().enumerate() {
        let node = lookup(prev, weights.node_index(n, k), level)?;
        for (q, f) in quad.iter_mut().zip(&node.f_total) {
            *q += w * f;
        }
    }
    for (r, q) in rhs.iter_mut().zip(&quad) {
        *r += q;
    }
    let t_next = grid.time(n + 1);
    let state = solver.solve(ivp, t_next, dt, rhs)?;
    NodeValue::evaluate(ivp, n + 1, t_next, state)
}

/// Everything one restart interval needs to advance any level by one step.
pub(crate) struct LevelStepper<'a> {
    pub ivp: &'a SplitIvp,
    pub grid: TimeGrid,
    pub weights: WeightTable,
    pub solver: &'a ImplicitSolver,
}

impl<'a> LevelStepper<'a> {
    pub fn new(
        ivp: &'a SplitIvp,
        levels: usize,
        grid: TimeGrid,
        solver: &'a ImplicitSolver,
    ) -> Result<Self> {
        Ok(Self {
            ivp,
            grid,
            weights: WeightTable::new(levels, grid.dt)?,
            solver,
        })
    }

    /// Indices of level `j - 1` read when level `j` computes index `m`.
    pub fn window_bounds(j: usize, m: usize) -> (usize, usize) {
        (lowest_index(j, m), required_index(j, m))
    }

    pub fn advance(
        &self,
        level: usize,
        own: &NodeValue,
        prev: &[Arc<NodeValue>],
    ) -> Result<NodeValue> {
        if level == 0 {
            predict_step(self.ivp, &self.grid, own, self.solver)
        } else {
            let w = self.weights.for_step(level, own.index);
            correct_step(level, self.ivp, &self.grid, own, prev, w, self.solver)
        }
    }
}
