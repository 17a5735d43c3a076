use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::ivp::{LinearOperator, SplitIvp};
use crate::linalg::{qr_factor, DenseMatrix, QrFactorization};
use crate::norm_inf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Converged once `||x - h f^S(t, x) - rhs||_inf <= tolerance * (1 + ||rhs||_inf)`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 25,
        }
    }
}

/// How implicit relations are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    /// Pre-factored linear solve when the problem exposes a linear stiff
    /// operator, Newton otherwise.
    #[default]
    Auto,
    /// Always Newton with a finite-difference Jacobian.
    Newton,
}

/// Solves `x - h f^S(t, x) = rhs` and caches the QR factorizations of
/// `I - h L`, keyed by operator and `h`.
///
/// Reads of cached factorizations never block each other; call
/// [`ImplicitSolver::prefactor`] before parallel use to avoid insertion
/// under contention.
#[derive(Debug, Default)]
pub struct ImplicitSolver {
    mode: SolveMode,
    newton: NewtonSettings,
    cache: RwLock<HashMap<(u64, u64), Arc<QrFactorization>>>,
}

impl ImplicitSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_mode(mut self, mode: SolveMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_newton(mut self, newton: NewtonSettings) -> Self {
        self.newton = newton;
        self
    }

    pub fn mode(&self) -> SolveMode {
        self.mode
    }

    pub fn newton_settings(&self) -> NewtonSettings {
        self.newton
    }

    /// Number of cached factorizations.
    pub fn cached(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    /// Factors `I - h L` ahead of time. A no-op for problems without a
    /// linear stiff operator or in Newton mode.
    pub fn prefactor(&self, ivp: &SplitIvp, h: f64) -> Result<()> {
        if let (SolveMode::Auto, Some(op)) = (self.mode, ivp.stiff_linear_operator()) {
            if h != 0.0 {
                self.factorization(op, h)?;
            }
        }
        Ok(())
    }

    fn factorization(&self, op: &LinearOperator, h: f64) -> Result<Arc<QrFactorization>> {
        let key = (op.id(), h.to_bits());
        if let Some(f) = self.cache.read().unwrap().get(&key) {
            return Ok(Arc::clone(f));
        }
        let mut cache = self.cache.write().unwrap();
        if let Some(f) = cache.get(&key) {
            return Ok(Arc::clone(f));
        }
        let f = Arc::new(qr_factor(&op.matrix().identity_minus_scaled(h)?)?);
        cache.insert(key, Arc::clone(&f));
        Ok(f)
    }

    /// Returns `x` with `x - h f^S(t, x) = rhs`.
    pub fn solve(&self, ivp: &SplitIvp, t: f64, h: f64, rhs: Vec<f64>) -> Result<Vec<f64>> {
        Error::check_len(ivp.dimension(), rhs.len())?;
        if h == 0.0 {
            return Ok(rhs);
        }
        match (self.mode, ivp.stiff_linear_operator()) {
            (SolveMode::Auto, Some(op)) => self.factorization(op, h)?.solve(&rhs),
            _ => self.newton_solve(ivp, t, h, rhs),
        }
    }

    fn newton_solve(&self, ivp: &SplitIvp, t: f64, h: f64, rhs: Vec<f64>) -> Result<Vec<f64>> {
        let n = ivp.dimension();
        let tol = self.newton.tolerance * (1.0 + norm_inf(&rhs));
        let residual = |x: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
            let fx = ivp.eval_stiff(t, x)?;
            let g = (0..n).map(|i| x[i] - h * fx[i] - rhs[i]).collect();
            Ok((g, fx))
        };

        let mut x = rhs.clone();
        let (mut g, mut fx) = residual(&x)?;
        let mut res = norm_inf(&g);
        for _ in 0..self.newton.max_iterations {
            if res <= tol {
                return Ok(x);
            }
            // Forward-difference Jacobian of G(x) = x - h f^S(t, x), column by column.
            let mut jac = DenseMatrix::identity(n);
            let sqrt_eps = f64::EPSILON.sqrt();
            let mut xp = x.clone();
            for col in 0..n {
                let delta = sqrt_eps * (1.0 + x[col].abs());
                xp[col] = x[col] + delta;
                let fp = ivp.eval_stiff(t, &xp)?;
                xp[col] = x[col];
                for row in 0..n {
                    jac[(row, col)] -= h * (fp[row] - fx[row]) / delta;
                }
            }
            let step = qr_factor(&jac)?.solve(&g)?;
            for (xi, si) in x.iter_mut().zip(&step) {
                *xi -= si;
            }
            (g, fx) = residual(&x)?;
            res = norm_inf(&g);
            if !res.is_finite() {
                break;
            }
        }
        if res <= tol {
            Ok(x)
        } else {
            Err(Error::NewtonDiverged {
                iterations: self.newton.max_iterations,
                residual: res,
            })
        }
    }
}
