//! Single-step implicit-explicit integrators.
//!
//! [`fbe_step`] is the first-order forward-backward Euler step that drives
//! every RIDC level. [`ark_step`] advances any coupled DIRK/explicit pair;
//! [`imex3_tableau`] and [`imex4_tableau`] are the reference third- and
//! fourth-order schemes.

mod solver;
mod tableau;

pub use solver::{ImplicitSolver, NewtonSettings, SolveMode};
pub use tableau::{fbe_tableau, imex3_tableau, imex4_tableau, ButcherPair};

use crate::error::{Error, Result};
use crate::ivp::SplitIvp;

pub(crate) fn ensure_finite(v: &[f64], time: f64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { time })
    }
}

fn check_step(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "time step must be positive, got {dt}"
        )))
    }
}

/// `y_{n+1} = y_n + dt f^S(t_n + dt, y_{n+1}) + dt f^N(t_n, y_n)`.
pub fn fbe_step(
    ivp: &SplitIvp,
    t_n: f64,
    y_n: &[f64],
    dt: f64,
    solver: &ImplicitSolver,
) -> Result<Vec<f64>> {
    let fnon = ivp.eval_nonstiff(t_n, y_n)?;
    fbe_step_with(ivp, t_n, y_n, &fnon, dt, solver)
}

/// [`fbe_step`] with `f^N(t_n, y_n)` already evaluated.
pub(crate) fn fbe_step_with(
    ivp: &SplitIvp,
    t_n: f64,
    y_n: &[f64],
    f_nonstiff: &[f64],
    dt: f64,
    solver: &ImplicitSolver,
) -> Result<Vec<f64>> {
    check_step(dt)?;
    Error::check_len(ivp.dimension(), y_n.len())?;
    let rhs: Vec<f64> = y_n
        .iter()
        .zip(f_nonstiff)
        .map(|(y, f)| y + dt * f)
        .collect();
    let t_next = t_n + dt;
    let y = solver.solve(ivp, t_next, dt, rhs)?;
    ensure_finite(&y, t_next)?;
    Ok(y)
}

/// One step of the additive Runge-Kutta scheme defined by `tab`.
///
/// Stage `i` solves `Y_i - a_ii dt f^S(t_i, Y_i) = y_n + dt sum_{j<i}(a^S_ij K^S_j + a^N_ij K^N_j)`
/// and sets `K^S_i = f^S(t_i, Y_i)`, `K^N_i = f^N(t_i, Y_i)`.
pub fn ark_step(
    ivp: &SplitIvp,
    tab: &ButcherPair,
    t_n: f64,
    y_n: &[f64],
    dt: f64,
    solver: &ImplicitSolver,
) -> Result<Vec<f64>> {
    check_step(dt)?;
    Error::check_len(ivp.dimension(), y_n.len())?;
    let s = tab.stages();
    let mut k_stiff: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut k_nonstiff: Vec<Vec<f64>> = Vec::with_capacity(s);
    for i in 0..s {
        let mut rhs = y_n.to_vec();
        for j in 0..i {
            let (a_s, a_n) = (tab.a_implicit()[i][j], tab.a_explicit()[i][j]);
            for (r, (ks, kn)) in rhs.iter_mut().zip(k_stiff[j].iter().zip(&k_nonstiff[j])) {
                *r += dt * (a_s * ks + a_n * kn);
            }
        }
        let t_i = t_n + tab.c()[i] * dt;
        let stage = solver.solve(ivp, t_i, tab.a_implicit()[i][i] * dt, rhs)?;
        ensure_finite(&stage, t_i)?;
        k_stiff.push(ivp.eval_stiff(t_i, &stage)?);
        k_nonstiff.push(ivp.eval_nonstiff(t_i, &stage)?);
    }
    let mut y = y_n.to_vec();
    for i in 0..s {
        let (b_s, b_n) = (tab.b_implicit()[i], tab.b_explicit()[i]);
        for (yv, (ks, kn)) in y.iter_mut().zip(k_stiff[i].iter().zip(&k_nonstiff[i])) {
            *yv += dt * (b_s * ks + b_n * kn);
        }
    }
    ensure_finite(&y, t_n + dt)?;
    Ok(y)
}

/// Marches `steps` uniform forward-backward Euler steps over the problem interval.
pub fn integrate_fbe(ivp: &SplitIvp, steps: usize, solver: &ImplicitSolver) -> Result<Vec<f64>> {
    let dt = uniform_step(ivp, steps)?;
    let mut y = ivp.initial_state().to_vec();
    for n in 0..steps {
        y = fbe_step(ivp, ivp.t_start() + n as f64 * dt, &y, dt, solver)?;
    }
    Ok(y)
}

/// Marches `steps` uniform steps of the additive Runge-Kutta scheme `tab`.
pub fn integrate_ark(
    ivp: &SplitIvp,
    tab: &ButcherPair,
    steps: usize,
    solver: &ImplicitSolver,
) -> Result<Vec<f64>> {
    let dt = uniform_step(ivp, steps)?;
    let mut y = ivp.initial_state().to_vec();
    for n in 0..steps {
        y = ark_step(ivp, tab, ivp.t_start() + n as f64 * dt, &y, dt, solver)?;
    }
    Ok(y)
}

/// Pre-factors every implicit system `tab` needs at step `dt`.
pub fn prefactor_ark(
    ivp: &SplitIvp,
    tab: &ButcherPair,
    dt: f64,
    solver: &ImplicitSolver,
) -> Result<()> {
    for a in tab.implicit_diagonal() {
        solver.prefactor(ivp, a * dt)?;
    }
    Ok(())
}

pub(crate) fn uniform_step(ivp: &SplitIvp, steps: usize) -> Result<f64> {
    if steps == 0 {
        return Err(Error::InvalidArgument("step count must be positive".into()));
    }
    Ok((ivp.t_end() - ivp.t_start()) / steps as f64)
}
