//! Method-of-lines benchmark problems.
//!
//! * Periodic advection-diffusion `u_t = c u_x + d u_xx` on `[0, 1)`,
//!   `u(x, 0) = 2 + sin(2 pi x)`: first-order upwind advection (non-stiff),
//!   central diffusion (stiff).
//! * Viscous Burgers `u_t + (u^2 / 2)_x = eps u_xx` on `[0, 1]` with
//!   `u(0) = u(1) = 0`, `u(x, 0) = sin(2 pi x) + sin(pi x) / 2`: central
//!   flux for the convective term (non-stiff), central diffusion (stiff).
//!
//! The stiff halves are evaluated by stencil; the dense matrices are
//! attached to the problem for the pre-factored implicit solves.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::imex::{imex4_tableau, integrate_ark, prefactor_ark, ImplicitSolver};
use crate::ivp::SplitIvp;
use crate::linalg::DenseMatrix;

fn grid_count(dx: f64) -> Result<usize> {
    if !(dx > 0.0 && dx < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grid spacing must lie in (0, 1), got {dx}"
        )));
    }
    let m = (1.0 / dx).round();
    if (m * dx - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "grid spacing {dx} does not divide [0, 1] evenly"
        )));
    }
    Ok(m as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvectionDiffusionSpec {
    pub c: f64,
    pub d: f64,
    pub dx: f64,
    pub t_end: f64,
}

impl AdvectionDiffusionSpec {
    /// `c = 0.1`, `d = 1e-3`, `dx = 1/1000`, `t_end = 40`.
    pub fn full() -> Self {
        Self {
            c: 0.1,
            d: 1e-3,
            dx: 1.0 / 1000.0,
            t_end: 40.0,
        }
    }

    /// Same coefficients on `dx = 1/200`, `t_end = 4`.
    pub fn desk() -> Self {
        Self {
            dx: 1.0 / 200.0,
            t_end: 4.0,
            ..Self::full()
        }
    }

    pub fn grid_points(&self) -> Result<usize> {
        grid_count(self.dx)
    }

    pub fn initial_profile(x: f64) -> f64 {
        2.0 + (2.0 * PI * x).sin()
    }

    pub fn build(&self) -> Result<AdvectionDiffusion> {
        if !(self.c > 0.0 && self.d > 0.0) {
            return Err(Error::InvalidArgument(
                "advection speed and diffusivity must be positive".into(),
            ));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidArgument("final time must be positive".into()));
        }
        let m = self.grid_points()?;
        let dx = self.dx;
        let a = self.c / dx;
        let k = self.d / (dx * dx);

        let advection = DenseMatrix::from_fn(m, m, |i, j| {
            if j == i {
                -a
            } else if j == (i + 1) % m {
                a
            } else {
                0.0
            }
        });
        let diffusion = DenseMatrix::from_fn(m, m, |i, j| {
            if j == i {
                -2.0 * k
            } else if j == (i + 1) % m || j == (i + m - 1) % m {
                k
            } else {
                0.0
            }
        });

        let initial: Vec<f64> = (0..m)
            .map(|i| Self::initial_profile(i as f64 * dx))
            .collect();
        let ivp = SplitIvp::new(
            0.0,
            self.t_end,
            initial,
            move |_, u| (0..m).map(|i| a * (u[(i + 1) % m] - u[i])).collect(),
            move |_, u| {
                (0..m)
                    .map(|i| k * (u[(i + m - 1) % m] - 2.0 * u[i] + u[(i + 1) % m]))
                    .collect()
            },
        )?
        .with_stiff_operator(diffusion.clone())?;
        Ok(AdvectionDiffusion {
            spec: *self,
            ivp,
            advection,
            diffusion,
        })
    }
}

#[derive(Debug, Clone)]
pub struct AdvectionDiffusion {
    pub spec: AdvectionDiffusionSpec,
    pub ivp: SplitIvp,
    /// Upwind advection matrix `A`; `f^N(t, u) = A u`.
    pub advection: DenseMatrix,
    /// Periodic diffusion matrix `D`; `f^S(t, u) = D u`.
    pub diffusion: DenseMatrix,
}

impl AdvectionDiffusion {
    /// Exact solution of the semi-discrete system: the initial Fourier mode
    /// evolves with the circulant eigenvalue `lambda_A + lambda_D`.
    pub fn semi_discrete_exact(&self, t: f64) -> Vec<f64> {
        let s = &self.spec;
        let m = (1.0 / s.dx).round() as usize;
        let theta = 2.0 * PI * s.dx;
        let re = s.c / s.dx * (theta.cos() - 1.0) + 2.0 * s.d * (theta.cos() - 1.0) / (s.dx * s.dx);
        let im = s.c / s.dx * theta.sin();
        (0..m)
            .map(|j| 2.0 + (re * t).exp() * (theta * j as f64 + im * t).sin())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersSpec {
    pub eps: f64,
    pub dx: f64,
    pub t_end: f64,
}

impl BurgersSpec {
    /// `eps = 1e-3`, `dx = 1/1000`, `t_end = 1`.
    pub fn full() -> Self {
        Self {
            eps: 1e-3,
            dx: 1.0 / 1000.0,
            t_end: 1.0,
        }
    }

    /// `dx = 1/200`.
    pub fn desk() -> Self {
        Self {
            dx: 1.0 / 200.0,
            ..Self::full()
        }
    }

    pub fn initial_profile(x: f64) -> f64 {
        (2.0 * PI * x).sin() + 0.5 * (PI * x).sin()
    }

    pub fn build(&self) -> Result<Burgers> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidArgument("viscosity must be positive".into()));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidArgument("final time must be positive".into()));
        }
        let m = grid_count(self.dx)?;
        if m < 3 {
            return Err(Error::InvalidArgument(
                "need at least two interior points".into(),
            ));
        }
        let n = m - 1;
        let dx = self.dx;
        let k = self.eps / (dx * dx);
        let diffusion = DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => -2.0 * k,
            1 => k,
            _ => 0.0,
        });
        // Interior unknowns u_1..u_{M-1}; ghosts u_0 = u_M = 0.
        let at = |u: &[f64], i: isize| -> f64 {
            if i < 0 || i as usize >= u.len() {
                0.0
            } else {
                u[i as usize]
            }
        };
        let initial: Vec<f64> = (1..m)
            .map(|i| Self::initial_profile(i as f64 * dx))
            .collect();
        let ivp = SplitIvp::new(
            0.0,
            self.t_end,
            initial,
            move |_, u| {
                (0..u.len() as isize)
                    .map(|i| {
                        let (l, r) = (at(u, i - 1), at(u, i + 1));
                        -(r * r - l * l) / (4.0 * dx)
                    })
                    .collect()
            },
            move |_, u| {
                (0..u.len() as isize)
                    .map(|i| k * (at(u, i - 1) - 2.0 * at(u, i) + at(u, i + 1)))
                    .collect()
            },
        )?
        .with_stiff_operator(diffusion.clone())?;
        Ok(Burgers {
            spec: *self,
            ivp,
            diffusion,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Burgers {
    pub spec: BurgersSpec,
    pub ivp: SplitIvp,
    /// Dirichlet diffusion matrix `eps D` on the interior points.
    pub diffusion: DenseMatrix,
}

impl Burgers {
    /// Interior grid coordinates `x_1..x_{M-1}`.
    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.ivp.dimension())
            .map(|i| i as f64 * self.spec.dx)
            .collect()
    }
}

/// High-accuracy solution at `t_end` by the fourth-order IMEX pair with
/// `refinement * finest_steps` uniform steps.
pub fn reference_solution(
    ivp: &SplitIvp,
    t_end: f64,
    finest_steps: usize,
    refinement: usize,
    solver: &ImplicitSolver,
) -> Result<Vec<f64>> {
    if refinement < 8 {
        return Err(Error::InvalidArgument(format!(
            "refinement must be at least 8, got {refinement}"
        )));
    }
    if t_end == ivp.t_start() {
        return Ok(ivp.initial_state().to_vec());
    }
    let ivp = ivp.restricted(ivp.t_start(), t_end, ivp.initial_state().to_vec())?;
    let steps = finest_steps * refinement;
    let tab = imex4_tableau();
    prefactor_ark(&ivp, &tab, (t_end - ivp.t_start()) / steps as f64, solver)?;
    integrate_ark(&ivp, &tab, steps, solver)
}
