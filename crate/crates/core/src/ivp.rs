//! Split initial-value problems.
//!
//! A [`SplitIvp`] carries the two halves of the right-hand side separately:
//! the stiff part `f^S`, advanced implicitly, and the non-stiff part `f^N`,
//! advanced explicitly. When `f^S(t, y) = L y` for a constant matrix `L` the
//! problem can expose `L` so implicit solves reduce to a pre-factored linear
//! system.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Right-hand side evaluator `(t, y) -> f(t, y)`.
pub type RhsFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

static NEXT_OPERATOR_ID: AtomicU64 = AtomicU64::new(1);

/// A constant linear stiff operator with an identity used to key cached
/// factorizations.
#[derive(Clone)]
pub struct LinearOperator {
    id: u64,
    matrix: Arc<DenseMatrix>,
}

impl LinearOperator {
    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument(format!(
                "linear stiff operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self {
            id: NEXT_OPERATOR_ID.fetch_add(1, Ordering::Relaxed),
            matrix: Arc::new(matrix),
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearOperator")
            .field("id", &self.id)
            .field("dimension", &self.matrix.rows())
            .finish()
    }
}

/// `y' = f^S(t, y) + f^N(t, y)` on `[t_start, t_end]` with `y(t_start) = initial_state`.
///
/// Instances are immutable and cheap to clone; the evaluators must be pure
/// functions of `(t, y)`.
#[derive(Clone)]
pub struct SplitIvp {
    dimension: usize,
    t_start: f64,
    t_end: f64,
    initial_state: Vec<f64>,
    nonstiff: Arc<RhsFn>,
    stiff: Arc<RhsFn>,
    stiff_linear: Option<LinearOperator>,
}

impl fmt::Debug for SplitIvp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SplitIvp")
            .field("dimension", &self.dimension)
            .field("t_start", &self.t_start)
            .field("t_end", &self.t_end)
            .field("stiff_linear", &self.stiff_linear)
            .finish_non_exhaustive()
    }
}

impl SplitIvp {
    pub fn new<N, S>(
        t_start: f64,
        t_end: f64,
        initial_state: Vec<f64>,
        nonstiff: N,
        stiff: S,
    ) -> Result<Self>
    where
        N: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        S: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if initial_state.is_empty() {
            return Err(Error::InvalidArgument(
                "problem dimension must be positive".into(),
            ));
        }
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(Error::InvalidArgument(format!(
                "time interval must satisfy t_start < t_end, got [{t_start}, {t_end}]"
            )));
        }
        if initial_state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: t_start });
        }
        Ok(Self {
            dimension: initial_state.len(),
            t_start,
            t_end,
            initial_state,
            nonstiff: Arc::new(nonstiff),
            stiff: Arc::new(stiff),
            stiff_linear: None,
        })
    }

    /// A problem whose stiff part is `f^S(t, y) = L y`, evaluated by dense
    /// matrix-vector product.
    pub fn with_linear_stiff_matrix<N>(
        t_start: f64,
        t_end: f64,
        initial_state: Vec<f64>,
        nonstiff: N,
        stiff: DenseMatrix,
    ) -> Result<Self>
    where
        N: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        let op = LinearOperator::new(stiff)?;
        let m = Arc::clone(&op.matrix);
        let ivp = Self::new(t_start, t_end, initial_state, nonstiff, move |_, y| {
            m.mat_vec(y).expect("dimension checked by SplitIvp")
        })?;
        ivp.attach_linear(op)
    }

    /// Declares that the stiff evaluator equals `L y` for the given operator.
    ///
    /// The evaluator is kept as is; callers that evaluate `L y` through a
    /// stencil get the fast evaluator and the dense operator for solves.
    pub fn with_stiff_operator(self, matrix: DenseMatrix) -> Result<Self> {
        self.attach_linear(LinearOperator::new(matrix)?)
    }

    fn attach_linear(mut self, op: LinearOperator) -> Result<Self> {
        Error::check_len(self.dimension, op.matrix.rows())?;
        self.stiff_linear = Some(op);
        Ok(self)
    }

    /// Same right-hand sides on a different interval and initial state.
    pub fn restricted(&self, t_start: f64, t_end: f64, initial_state: Vec<f64>) -> Result<Self> {
        Error::check_len(self.dimension, initial_state.len())?;
        if !(t_start < t_end) {
            return Err(Error::InvalidArgument(format!(
                "time interval must satisfy t_start < t_end, got [{t_start}, {t_end}]"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            initial_state,
            ..self.clone()
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.initial_state
    }

    pub fn stiff_linear_operator(&self) -> Option<&LinearOperator> {
        self.stiff_linear.as_ref()
    }

    pub fn eval_nonstiff(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.dimension, y.len())?;
        let out = (self.nonstiff)(t, y);
        Error::check_len(self.dimension, out.len())?;
        Ok(out)
    }

    pub fn eval_stiff(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.dimension, y.len())?;
        let out = (self.stiff)(t, y);
        Error::check_len(self.dimension, out.len())?;
        Ok(out)
    }

    /// `f^S(t, y) + f^N(t, y)`.
    pub fn eval_full_rhs(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.eval_stiff(t, y)?;
        let nonstiff = self.eval_nonstiff(t, y)?;
        for (o, n) in out.iter_mut().zip(&nonstiff) {
            *o += n;
        }
        Ok(out)
    }
}

/// Free-function form of [`SplitIvp::eval_full_rhs`].
pub fn eval_full_rhs(ivp: &SplitIvp, t: f64, y: &[f64]) -> Result<Vec<f64>> {
    ivp.eval_full_rhs(t, y)
}
