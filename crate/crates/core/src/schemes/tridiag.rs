//! Compact tridiagonal storage and solvers.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Tridiagonal matrix with per-row bands.
///
/// Row `i` reads `lower[i-1]·x[i-1] + diag[i]·x[i] + upper[i]·x[i+1]`.
/// Neumann edge rows (the doubled ghost-node entry) live directly in the
/// first `upper` and last `lower` entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TridiagonalMatrix {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty tridiagonal matrix".into()));
        }
        for band in [&lower, &upper] {
            if band.len() != n - 1 {
                return Err(Error::DimensionMismatch {
                    expected: n - 1,
                    got: band.len(),
                });
            }
        }
        Ok(TridiagonalMatrix { lower, diag, upper })
    }

    /// Constant bands: `upper = a`, `diag = b`, `lower = c`.
    pub fn constant(a: f64, b: f64, c: f64, n: usize) -> Self {
        assert!(n > 0, "tridiagonal matrix needs at least one row");
        TridiagonalMatrix {
            lower: vec![c; n - 1],
            diag: vec![b; n],
            upper: vec![a; n - 1],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(0.0, 1.0, 0.0, n)
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub(crate) fn diag_mut(&mut self) -> &mut [f64] {
        &mut self.diag
    }

    pub fn is_identity(&self) -> bool {
        self.diag.iter().all(|&d| d == 1.0) && self.lower.iter().chain(&self.upper).all(|&v| v == 0.0)
    }

    /// `y = self · x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if j + 1 == i {
                self.lower[j]
            } else if i + 1 == j {
                self.upper[i]
            } else {
                0.0
            }
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.lower == self.upper
    }

    /// Solves `self · x = rhs`, falling back to partial pivoting when the
    /// plain sweep meets a zero pivot.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match thomas_solve(self, rhs) {
            Err(Error::SingularOrNonDominant { .. }) => solve_pivoting(self, rhs),
            other => other,
        }
    }
}

fn pivot_is_zero(pivot: f64, scale: f64) -> bool {
    !pivot.is_finite() || pivot.abs() <= 1e-14 * scale
}

/// Thomas sweep without pivoting.
pub fn thomas_solve(a: &TridiagonalMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    let mut c_star = vec![0.0; n];
    let mut x = vec![0.0; n];

    let row_scale = |i: usize| {
        let mut s = a.diag[i].abs();
        if i > 0 {
            s += a.lower[i - 1].abs();
        }
        if i + 1 < n {
            s += a.upper[i].abs();
        }
        s
    };

    let mut pivot = a.diag[0];
    if pivot_is_zero(pivot, row_scale(0)) {
        return Err(Error::SingularOrNonDominant { row: 0 });
    }
    if n > 1 {
        c_star[0] = a.upper[0] / pivot;
    }
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = a.diag[i] - a.lower[i - 1] * c_star[i - 1];
        if pivot_is_zero(pivot, row_scale(i)) {
            return Err(Error::SingularOrNonDominant { row: i });
        }
        if i + 1 < n {
            c_star[i] = a.upper[i] / pivot;
        }
        x[i] = (rhs[i] - a.lower[i - 1] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c_star[i] * x[i + 1];
    }
    Ok(x)
}

/// Banded Gaussian elimination with partial pivoting. Row swaps fill one
/// extra superdiagonal.
pub fn solve_pivoting(a: &TridiagonalMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    // Row i keeps columns i..=i+2 after elimination: d = diag, u1, u2.
    let mut sub: Vec<f64> = a.lower.clone();
    let mut d = a.diag.clone();
    let mut u1: Vec<f64> = (0..n).map(|i| if i + 1 < n { a.upper[i] } else { 0.0 }).collect();
    let mut u2 = vec![0.0; n];
    let mut b = rhs.to_vec();
    let scale = d
        .iter()
        .chain(&sub)
        .chain(&u1)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);

    for k in 0..n {
        if k + 1 < n && sub[k].abs() > d[k].abs() {
            // Swap rows k and k+1. Row k+1 holds (sub[k], d[k+1], u1[k+1]) in
            // columns k, k+1, k+2.
            std::mem::swap(&mut d[k], &mut sub[k]);
            let (row_k1, row_k2) = (u1[k], u2[k]);
            u1[k] = d[k + 1];
            u2[k] = if k + 2 < n { u1[k + 1] } else { 0.0 };
            d[k + 1] = row_k1;
            u1[k + 1] = row_k2;
            b.swap(k, k + 1);
        }
        if pivot_is_zero(d[k], scale) {
            return Err(Error::Singular { column: k });
        }
        if k + 1 < n {
            let m = sub[k] / d[k];
            sub[k] = 0.0;
            d[k + 1] -= m * u1[k];
            if k + 2 < n {
                u1[k + 1] -= m * u2[k];
            }
            b[k + 1] -= m * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        if i + 1 < n {
            acc -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            acc -= u2[i] * x[i + 2];
        }
        x[i] = acc / d[i];
    }
    Ok(x)
}
