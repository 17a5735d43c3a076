//! Deferred-correction quadrature weights on a uniform grid.
//!
//! Correction level `j` integrates the previous level's right-hand side over
//! `[t_n, t_{n+1}]` with the degree-`j` interpolant through `j + 1` grid
//! nodes. In steady state the stencil trails the step: nodes
//! `t_{n+1}, t_n, ..., t_{n+1-j}`, stored newest-first. During start-up
//! (`n < j - 1`) there are not enough past nodes, so the stencil is anchored
//! at the left: `t_0, ..., t_j`, stored oldest-first.
//!
//! Weights are exact rationals in units of `dt` (the Lagrange basis is
//! expanded into monomials and integrated term by term), rounded once and
//! scaled by `dt`.

use num_rational::Ratio;

use crate::error::{Error, Result};

type Q = Ratio<i128>;

/// Which stencil a weight set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Trailing stencil; weight `k` multiplies the value at `t_{n+1-k}`.
    Steady,
    /// Left-anchored stencil for step `n`; weight `k` multiplies the value at `t_k`.
    Startup { n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureWeights {
    level: usize,
    regime: Regime,
    weights: Vec<f64>,
}

impl QuadratureWeights {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Grid index of the node weight `k` multiplies, for the step `n -> n+1`.
    pub fn node_index(&self, n: usize, k: usize) -> usize {
        match self.regime {
            Regime::Steady => n + 1 - k,
            Regime::Startup { .. } => k,
        }
    }
}

/// Integral over `[0, 1]` of each Lagrange basis polynomial through `nodes`
/// (expressed in units of `dt`, relative to `t_n`).
fn lagrange_integrals(nodes: &[i64]) -> Vec<Q> {
    let zero = Q::from_integer(0);
    let one = Q::from_integer(1);
    (0..nodes.len())
        .map(|k| {
            // Monomial coefficients of prod_{i != k} (s - s_i) / (s_k - s_i), lowest degree first.
            let mut poly = vec![one];
            for (i, &si) in nodes.iter().enumerate() {
                if i == k {
                    continue;
                }
                let denom = Q::from_integer((nodes[k] - si) as i128);
                let root = Q::from_integer(si as i128);
                let mut next = vec![zero; poly.len() + 1];
                for (d, c) in poly.iter().enumerate() {
                    next[d + 1] += c / denom;
                    next[d] -= c * root / denom;
                }
                poly = next;
            }
            poly.iter()
                .enumerate()
                .map(|(d, c)| c / Q::from_integer(d as i128 + 1))
                .fold(zero, |acc, v| acc + v)
        })
        .collect()
}

fn to_scaled_f64(w: &[Q], dt: f64) -> Vec<f64> {
    w.iter()
        .map(|q| dt * (*q.numer() as f64 / *q.denom() as f64))
        .collect()
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "time step must be positive, got {dt}"
        )))
    }
}

/// Weights for level `j` on the trailing stencil; independent of `n`.
pub fn steady_weights(j: usize, dt: f64) -> Result<QuadratureWeights> {
    if j == 0 {
        return Err(Error::InvalidArgument(
            "the prediction level uses no quadrature (level must be >= 1)".into(),
        ));
    }
    check_dt(dt)?;
    let nodes: Vec<i64> = (0..=j as i64).map(|k| 1 - k).collect();
    Ok(QuadratureWeights {
        level: j,
        regime: Regime::Steady,
        weights: to_scaled_f64(&lagrange_integrals(&nodes), dt),
    })
}

/// Weights for level `j` at start-up step `n < j - 1` on nodes `t_0..t_j`.
pub fn startup_weights(j: usize, n: usize, dt: f64) -> Result<QuadratureWeights> {
    if j == 0 || n + 1 >= j {
        return Err(Error::InvalidArgument(format!(
            "start-up weights need 0 <= n < j - 1, got j = {j}, n = {n}"
        )));
    }
    check_dt(dt)?;
    // Shift so the integration interval is [0, 1].
    let nodes: Vec<i64> = (0..=j as i64).map(|k| k - n as i64).collect();
    Ok(QuadratureWeights {
        level: j,
        regime: Regime::Startup { n },
        weights: to_scaled_f64(&lagrange_integrals(&nodes), dt),
    })
}

/// `sum_k w_k window[k]`, accumulated in order of `k`.
pub fn apply_quadrature<V: AsRef<[f64]>>(w: &QuadratureWeights, window: &[V]) -> Result<Vec<f64>> {
    Error::check_len(w.weights.len(), window.len())?;
    let dim = window[0].as_ref().len();
    let mut out = vec![0.0; dim];
    for (wk, v) in w.weights.iter().zip(window) {
        let v = v.as_ref();
        Error::check_len(dim, v.len())?;
        for (o, x) in out.iter_mut().zip(v) {
            *o += wk * x;
        }
    }
    Ok(out)
}

/// All weight sets a run with `levels` levels needs, computed once.
#[derive(Debug, Clone)]
pub struct WeightTable {
    steady: Vec<QuadratureWeights>,
    startup: Vec<Vec<QuadratureWeights>>,
}

impl WeightTable {
    pub fn new(levels: usize, dt: f64) -> Result<Self> {
        let mut steady = Vec::new();
        let mut startup = Vec::new();
        for j in 1..levels {
            steady.push(steady_weights(j, dt)?);
            startup.push(
                (0..j.saturating_sub(1))
                    .map(|n| startup_weights(j, n, dt))
                    .collect::<Result<_>>()?,
            );
        }
        Ok(Self { steady, startup })
    }

    /// Weights for level `j >= 1` advancing from step `n`.
    pub fn for_step(&self, j: usize, n: usize) -> &QuadratureWeights {
        assert!(j >= 1 && j <= self.steady.len(), "no weights for level {j}");
        if n + 1 < j {
            &self.startup[j - 1][n]
        } else {
            &self.steady[j - 1]
        }
    }
}
