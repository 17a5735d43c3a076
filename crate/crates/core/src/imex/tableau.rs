use num_rational::Ratio;

use crate::error::{Error, Result};

type Q = Ratio<i64>;

const fn q(n: i64, d: i64) -> Q {
    Ratio::new_raw(n, d)
}

const Z: Q = q(0, 1);

/// Coupled DIRK (stiff) and explicit (non-stiff) tableaux of equal stage count.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherPair {
    stages: usize,
    c: Vec<f64>,
    a_implicit: Vec<Vec<f64>>,
    a_explicit: Vec<Vec<f64>>,
    b_implicit: Vec<f64>,
    b_explicit: Vec<f64>,
}

impl ButcherPair {
    /// Builds a pair from floating-point coefficients.
    ///
    /// `a_implicit` must be lower triangular, `a_explicit` strictly lower
    /// triangular, and every row of both must sum to its abscissa within 1e-14.
    pub fn new(
        c: Vec<f64>,
        a_implicit: Vec<Vec<f64>>,
        a_explicit: Vec<Vec<f64>>,
        b_implicit: Vec<f64>,
        b_explicit: Vec<f64>,
    ) -> Result<Self> {
        let s = c.len();
        if s == 0 {
            return Err(Error::InvalidArgument(
                "tableau needs at least one stage".into(),
            ));
        }
        for (name, rows) in [("implicit", &a_implicit), ("explicit", &a_explicit)] {
            if rows.len() != s || rows.iter().any(|r| r.len() != s) {
                return Err(Error::InvalidArgument(format!(
                    "{name} tableau must be {s}x{s}"
                )));
            }
        }
        Error::check_len(s, b_implicit.len())?;
        Error::check_len(s, b_explicit.len())?;
        for i in 0..s {
            if a_implicit[i][i + 1..].iter().any(|&v| v != 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "implicit tableau row {i} has entries above the diagonal"
                )));
            }
            if a_explicit[i][i..].iter().any(|&v| v != 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "explicit tableau row {i} has entries on or above the diagonal"
                )));
            }
            for (name, row) in [("implicit", &a_implicit[i]), ("explicit", &a_explicit[i])] {
                let sum: f64 = row.iter().sum();
                if (sum - c[i]).abs() > 1e-14 {
                    return Err(Error::InvalidArgument(format!(
                        "{name} row {i} sums to {sum}, abscissa is {}",
                        c[i]
                    )));
                }
            }
        }
        Ok(Self {
            stages: s,
            c,
            a_implicit,
            a_explicit,
            b_implicit,
            b_explicit,
        })
    }

    /// Exact rational coefficients, checked in rational arithmetic before
    /// rounding to `f64`.
    fn from_rationals(
        c: &[Q],
        a_implicit: &[&[Q]],
        a_explicit: &[&[Q]],
        b_implicit: &[Q],
        b_explicit: &[Q],
    ) -> Self {
        let s = c.len();
        let square = |rows: &[&[Q]]| -> Vec<Vec<Q>> {
            rows.iter()
                .map(|r| {
                    let mut full = r.to_vec();
                    full.resize(s, Z);
                    full
                })
                .collect()
        };
        let ai = square(a_implicit);
        let ae = square(a_explicit);
        for i in 0..s {
            let si: Q = ai[i].iter().sum();
            let se: Q = ae[i].iter().sum();
            assert_eq!(
                si, c[i],
                "implicit row {i} is inconsistent with its abscissa"
            );
            assert_eq!(
                se, c[i],
                "explicit row {i} is inconsistent with its abscissa"
            );
        }
        let f = |v: &Q| *v.numer() as f64 / *v.denom() as f64;
        let fv = |v: &[Q]| v.iter().map(f).collect::<Vec<_>>();
        Self::new(
            fv(c),
            ai.iter().map(|r| fv(r)).collect(),
            ae.iter().map(|r| fv(r)).collect(),
            fv(b_implicit),
            fv(b_explicit),
        )
        .expect("built-in tableau is well formed")
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn a_implicit(&self) -> &[Vec<f64>] {
        &self.a_implicit
    }

    pub fn a_explicit(&self) -> &[Vec<f64>] {
        &self.a_explicit
    }

    pub fn b_implicit(&self) -> &[f64] {
        &self.b_implicit
    }

    pub fn b_explicit(&self) -> &[f64] {
        &self.b_explicit
    }

    /// Distinct nonzero diagonal entries of the implicit tableau.
    pub fn implicit_diagonal(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for i in 0..self.stages {
            let a = self.a_implicit[i][i];
            if a != 0.0 && !out.contains(&a) {
                out.push(a);
            }
        }
        out
    }
}

/// Forward-backward Euler written as a two-stage pair.
///
/// The first stage only evaluates `f^N(t_n, y_n)`; the second is the
/// backward-Euler solve. Used to check the generic stepper against the
/// dedicated first-order step.
pub fn fbe_tableau() -> ButcherPair {
    let one = q(1, 1);
    ButcherPair::from_rationals(
        &[Z, one],
        &[&[Z], &[Z, one]],
        &[&[Z], &[one]],
        &[Z, one],
        &[one, Z],
    )
}

/// Third-order, five-stage IMEX pair.
pub fn imex3_tableau() -> ButcherPair {
    let b_s = [q(1, 6), Z, q(2, 3), q(-5, 6), q(1, 1)];
    let b_n = [q(1, 6), Z, q(2, 3), q(1, 6), Z];
    ButcherPair::from_rationals(
        &[Z, q(1, 2), q(1, 2), q(1, 1), q(1, 1)],
        &[
            &[Z],
            &[Z, q(1, 2)],
            &[q(1, 4), q(-5, 12), q(2, 3)],
            &[q(2, 1), q(-7, 2), q(1, 2), q(2, 1)],
            &b_s,
        ],
        &[
            &[Z],
            &[q(1, 2)],
            &[q(1, 4), q(1, 4)],
            &[Z, q(1, 1), Z],
            &[q(1, 6), Z, q(2, 3), q(1, 6)],
        ],
        &b_s,
        &b_n,
    )
}

/// Fourth-order, seven-stage IMEX pair.
pub fn imex4_tableau() -> ButcherPair {
    let b_s = [q(1, 6), Z, Z, Z, q(2, 3), q(-1, 2), q(2, 3)];
    let b_n = [q(1, 6), Z, Z, Z, q(2, 3), q(1, 6), Z];
    ButcherPair::from_rationals(
        &[Z, q(1, 3), q(1, 3), q(1, 2), q(1, 2), q(1, 1), q(1, 1)],
        &[
            &[Z],
            &[q(-1, 6), q(1, 2)],
            &[q(1, 6), q(-1, 3), q(1, 2)],
            &[q(3, 8), q(-3, 8), Z, q(1, 2)],
            &[q(1, 8), Z, q(3, 8), q(-1, 2), q(1, 2)],
            &[q(-1, 2), Z, q(3, 1), q(-3, 1), q(1, 1), q(1, 2)],
            &b_s,
        ],
        &[
            &[Z],
            &[q(1, 3)],
            &[q(1, 6), q(1, 6)],
            &[q(1, 8), Z, q(3, 8)],
            &[q(1, 8), Z, q(3, 8), Z],
            &[q(1, 2), Z, q(-3, 2), Z, q(2, 1)],
            &[q(1, 6), Z, Z, Z, q(2, 3), q(1, 6)],
        ],
        &b_s,
        &b_n,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_row_sums(tab: &ButcherPair) {
        for i in 0..tab.stages() {
            let si: f64 = tab.a_implicit()[i].iter().sum();
            let se: f64 = tab.a_explicit()[i].iter().sum();
            assert!((si - tab.c()[i]).abs() <= 1e-14);
            assert!((se - tab.c()[i]).abs() <= 1e-14);
        }
    }

    #[test]
    fn imex3_coefficients() {
        let t = imex3_tableau();
        assert_eq!(t.stages(), 5);
        assert_eq!(
            t.b_implicit(),
            &[1.0 / 6.0, 0.0, 2.0 / 3.0, -5.0 / 6.0, 1.0]
        );
        assert_eq!(t.a_implicit()[2][1], -5.0 / 12.0);
        assert_eq!(t.a_implicit()[4], t.b_implicit().to_vec());
        assert_eq!(t.a_explicit()[3], vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(t.c(), &[0.0, 0.5, 0.5, 1.0, 1.0]);
        let last: f64 = t.a_implicit()[4].iter().sum();
        assert!((last - 1.0).abs() < 1e-15);
        assert_row_sums(&t);
    }

    #[test]
    fn imex4_coefficients() {
        let t = imex4_tableau();
        assert_eq!(t.stages(), 7);
        assert_eq!(
            t.b_implicit(),
            &[1.0 / 6.0, 0.0, 0.0, 0.0, 2.0 / 3.0, -0.5, 2.0 / 3.0]
        );
        assert_eq!(t.a_explicit()[5], vec![0.5, 0.0, -1.5, 0.0, 2.0, 0.0, 0.0]);
        assert_eq!(
            t.b_explicit(),
            &[1.0 / 6.0, 0.0, 0.0, 0.0, 2.0 / 3.0, 1.0 / 6.0, 0.0]
        );
        let sum: f64 = t.b_explicit().iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
        for i in 1..6 {
            assert_eq!(t.a_implicit()[i][i], 0.5);
        }
        assert_eq!(t.c(), &[0.0, 1.0 / 3.0, 1.0 / 3.0, 0.5, 0.5, 1.0, 1.0]);
        assert_eq!(t.implicit_diagonal(), vec![0.5, 2.0 / 3.0]);
        assert_row_sums(&t);
    }

    #[test]
    fn structural_checks() {
        let bad_upper = ButcherPair::new(
            vec![0.0, 1.0],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
        );
        assert!(bad_upper.is_err());
        let bad_diag_explicit = ButcherPair::new(
            vec![1.0],
            vec![vec![1.0]],
            vec![vec![1.0]],
            vec![1.0],
            vec![1.0],
        );
        assert!(bad_diag_explicit.is_err());
        let bad_sum = ButcherPair::new(
            vec![0.5],
            vec![vec![1.0]],
            vec![vec![0.0]],
            vec![1.0],
            vec![1.0],
        );
        assert!(bad_sum.is_err());
        assert_row_sums(&fbe_tableau());
    }
}
