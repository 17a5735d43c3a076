//! Semi-implicit parallel-in-time integration.
//!
//! The crate provides the building blocks of revisionist integral deferred
//! correction (RIDC) with first-order implicit-explicit (IMEX) predictors and
//! correctors:
//!
//! * [`ivp`]: split initial-value problems `y' = f^S(t, y) + f^N(t, y)`
//! * [`linalg`]: dense storage and Householder QR used by every implicit solve
//! * [`imex`]: forward-backward Euler and additive Runge-Kutta steppers
//! * [`quadrature`]: deferred-correction integration weights
//! * [`ridc`]: the predictor/corrector engine, serial and pipelined
//! * [`mol`]: method-of-lines advection-diffusion and viscous Burgers problems
//!
//! A fourth-order run on the periodic advection-diffusion problem:
//!
//! ```
//! use ridc_core::mol::AdvectionDiffusionSpec;
//! use ridc_core::ridc::{run_pipelined, RidcConfig};
//! use ridc_core::ImplicitSolver;
//!
//! let spec = AdvectionDiffusionSpec { dx: 1.0 / 50.0, t_end: 0.5, ..AdvectionDiffusionSpec::desk() };
//! let problem = spec.build().unwrap();
//! let config = RidcConfig::new(4, 40).with_workers(2);
//! let solver = ImplicitSolver::new();
//! let solution = run_pipelined(&problem.ivp, &config, &solver).unwrap();
//! assert_eq!(solution.final_state.len(), 50);
//! ```
// `!(a < b)` comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod imex;
pub mod ivp;
pub mod linalg;
pub mod mol;
pub mod quadrature;
pub mod ridc;

pub use error::{Error, Result};
pub use imex::{ButcherPair, ImplicitSolver, NewtonSettings, SolveMode};
pub use ivp::{eval_full_rhs, LinearOperator, SplitIvp};
pub use linalg::{mat_vec, qr_factor, qr_solve, DenseMatrix, QrFactorization};
pub use quadrature::{QuadratureWeights, Regime};
pub use ridc::{RidcConfig, RidcSolution};

/// Maximum absolute entry of a vector.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
