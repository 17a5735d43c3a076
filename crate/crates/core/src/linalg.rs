//! Dense row-major matrices and Householder QR.
//!
//! Implicit systems `(I - a dt L) x = b` are factored once per coefficient
//! and reused, so each solve costs one `Q^T b` product and one back
//! substitution.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be positive".into(),
            ));
        }
        Error::check_len(rows * cols, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mat_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.cols, x.len())?;
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        Error::check_len(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `I - coeff * self`.
    pub fn identity_minus_scaled(&self, coeff: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::InvalidArgument(
                "shifted system needs a square matrix".into(),
            ));
        }
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= -coeff;
        }
        for i in 0..self.rows {
            out[(i, i)] += 1.0;
        }
        Ok(out)
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn mat_vec(m: &DenseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    m.mat_vec(x)
}

/// `M = Q R` with explicit orthogonal `Q` and upper-triangular `R`.
#[derive(Debug, Clone)]
pub struct QrFactorization {
    q: DenseMatrix,
    r: DenseMatrix,
}

impl QrFactorization {
    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    pub fn dimension(&self) -> usize {
        self.q.rows
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        qr_solve(self, b)
    }
}

/// Householder QR without pivoting.
///
/// Fails with [`Error::SingularMatrix`] when a diagonal entry of `R` falls
/// below `1e-14 ||M||_inf`.
pub fn qr_factor(m: &DenseMatrix) -> Result<QrFactorization> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!(
            "QR factorization needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    let scale = m.norm_inf();
    let mut r = m.clone();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n);
    let mut w = vec![0.0; n];

    for k in 0..n {
        let norm = (k..n).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>().sqrt();
        let alpha = if r[(k, k)] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..n).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            reflectors.push((v, 0.0));
            continue;
        }
        let beta = 2.0 / vnorm2;
        apply_reflector(&mut r, k, &v, beta, &mut w);
        r[(k, k)] = alpha;
        for i in k + 1..n {
            r[(i, k)] = 0.0;
        }
        reflectors.push((v, beta));
    }

    for i in 0..n {
        let d = r[(i, i)];
        if !(d.abs() > 1e-14 * scale) {
            return Err(Error::SingularMatrix { index: i, value: d });
        }
    }

    // Q = H_0 H_1 ... H_{n-1}, accumulated from the right.
    let mut q = DenseMatrix::identity(n);
    for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
        if *beta != 0.0 {
            apply_reflector(&mut q, k, v, *beta, &mut w);
        }
    }
    Ok(QrFactorization { q, r })
}

/// Applies `I - beta v v^T` to the trailing block `a[k.., k..]`.
fn apply_reflector(a: &mut DenseMatrix, k: usize, v: &[f64], beta: f64, w: &mut [f64]) {
    let n = a.cols;
    let w = &mut w[k..n];
    w.iter_mut().for_each(|x| *x = 0.0);
    for (vi, i) in v.iter().zip(k..a.rows) {
        if *vi == 0.0 {
            continue;
        }
        for (wc, aic) in w.iter_mut().zip(&a.data[i * n + k..(i + 1) * n]) {
            *wc += vi * aic;
        }
    }
    for (vi, i) in v.iter().zip(k..a.rows) {
        let s = beta * vi;
        if s == 0.0 {
            continue;
        }
        for (aic, wc) in a.data[i * n + k..(i + 1) * n].iter_mut().zip(w.iter()) {
            *aic -= s * wc;
        }
    }
}

/// Solves `Q R x = b` as `R x = Q^T b`.
pub fn qr_solve(f: &QrFactorization, b: &[f64]) -> Result<Vec<f64>> {
    let n = f.dimension();
    Error::check_len(n, b.len())?;
    let mut y = vec![0.0; n];
    for (i, bi) in b.iter().enumerate() {
        if *bi == 0.0 {
            continue;
        }
        for (yc, qic) in y.iter_mut().zip(f.q.row(i)) {
            *yc += bi * qic;
        }
    }
    for i in (0..n).rev() {
        let row = f.r.row(i);
        let mut s = y[i];
        for (rc, xc) in row[i + 1..].iter().zip(&y[i + 1..]) {
            s -= rc * xc;
        }
        y[i] = s / row[i];
    }
    Ok(y)
}
