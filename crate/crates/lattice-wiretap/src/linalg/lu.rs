//! LU factorization with partial pivoting: inversion, determinant, and a
//! condition estimate used to refuse near-singular inputs.

use super::{LinalgError, Matrix};

/// Inversion refuses matrices whose 1-norm condition estimate exceeds this.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

struct LuFactors {
    /// Combined L (below diagonal, unit diagonal implied) and U (upper).
    lu: Vec<f64>,
    /// Row permutation applied during pivoting.
    perm: Vec<usize>,
    /// Parity of the permutation (+1.0 / -1.0).
    sign: f64,
    n: usize,
}

fn factorize(a: &Matrix) -> Result<LuFactors, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let mut lu = a.as_slice().to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_abs = lu[col * n + col].abs();
        for row in col + 1..n {
            let cand = lu[row * n + col].abs();
            if cand > pivot_abs {
                pivot_abs = cand;
                pivot_row = row;
            }
        }
        if pivot_abs == 0.0 {
            return Err(LinalgError::SingularMatrix { cond: f64::INFINITY, cap: DEFAULT_CONDITION_CAP });
        }
        if pivot_row != col {
            for k in 0..n {
                lu.swap(col * n + k, pivot_row * n + k);
            }
            perm.swap(col, pivot_row);
            sign = -sign;
        }
        let pivot = lu[col * n + col];
        for row in col + 1..n {
            let factor = lu[row * n + col] / pivot;
            lu[row * n + col] = factor;
            for k in col + 1..n {
                lu[row * n + k] -= factor * lu[col * n + k];
            }
        }
    }

    Ok(LuFactors { lu, perm, sign, n })
}

impl LuFactors {
    /// Solves A x = b given the factorization of A.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    fn inverse(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for col in 0..n {
            e[col] = 1.0;
            let x = self.solve(&e);
            e[col] = 0.0;
            for (row, &value) in x.iter().enumerate() {
                out.set(row, col, value);
            }
        }
        out
    }
}

/// Inverse under the default condition cap.
pub fn invert(a: &Matrix) -> Result<Matrix, LinalgError> {
    invert_capped(a, DEFAULT_CONDITION_CAP)
}

/// Inverse, refusing inputs whose condition estimate exceeds `cap`.
pub fn invert_capped(a: &Matrix, cap: f64) -> Result<Matrix, LinalgError> {
    let factors = factorize(a).map_err(|e| match e {
        LinalgError::SingularMatrix { cond, .. } => LinalgError::SingularMatrix { cond, cap },
        other => other,
    })?;
    let inv = factors.inverse();
    let cond = a.norm_one() * inv.norm_one();
    if !cond.is_finite() || cond > cap {
        return Err(LinalgError::SingularMatrix { cond, cap });
    }
    Ok(inv)
}

/// 1-norm condition estimate; infinite when factorization finds a zero pivot.
pub fn condition_estimate(a: &Matrix) -> Result<f64, LinalgError> {
    match factorize(a) {
        Ok(factors) => {
            let inv = factors.inverse();
            let cond = a.norm_one() * inv.norm_one();
            Ok(if cond.is_finite() { cond } else { f64::INFINITY })
        }
        Err(LinalgError::SingularMatrix { .. }) => Ok(f64::INFINITY),
        Err(other) => Err(other),
    }
}

pub fn determinant(a: &Matrix) -> Result<f64, LinalgError> {
    match factorize(a) {
        Ok(factors) => {
            let n = factors.n;
            let mut det = factors.sign;
            for i in 0..n {
                det *= factors.lu[i * n + i];
            }
            Ok(det)
        }
        Err(LinalgError::SingularMatrix { .. }) => Ok(0.0),
        Err(other) => Err(other),
    }
}
