//! One-sided Jacobi singular value decomposition for square matrices.

use super::{LinalgError, Matrix, Vector};

const MAX_SWEEPS: usize = 64;
// Relative orthogonality threshold for a column pair; normalized columns end
// up pairwise orthogonal within this bound.
const PAIR_TOL: f64 = 1e-13;

/// Factorization `a = u * diag(singular_values) * v` with orthonormal `u`,
/// `v` and singular values sorted in nonincreasing order.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    pub u: Matrix,
    pub singular_values: Vector,
    pub v: Matrix,
}

impl SvdFactorization {
    /// Multiplies the factors back together.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.singular_values.len();
        let mut scaled = self.u.clone();
        for j in 0..n {
            let s = self.singular_values.get(j);
            for i in 0..n {
                scaled.set(i, j, scaled.get(i, j) * s);
            }
        }
        scaled.multiply(&self.v).expect("conformable factors")
    }
}

/// Computes the SVD of a square matrix by one-sided Jacobi rotations.
pub fn svd(a: &Matrix) -> Result<SvdFactorization, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();

    // Right rotations are accumulated so that work = a * v_acc throughout.
    let mut work = a.clone();
    let mut v_acc = Matrix::identity(n);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in i + 1..n {
                let (alpha, beta, gamma) = column_moments(&work, i, j);
                if gamma.abs() <= PAIR_TOL * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut work, i, j, c, s);
                rotate_columns(&mut v_acc, i, j, c, s);
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::ConvergenceFailure { sweeps: MAX_SWEEPS });
    }

    // Column norms are the singular values; sort them nonincreasing.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| work.column(j).norm()).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).expect("finite norms"));

    let mut u = Matrix::zeros(n, n);
    let mut v = Matrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    let mut zero_cols = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        values.push(s);
        if s == 0.0 {
            zero_cols.push(dst);
        } else {
            for row in 0..n {
                u.set(row, dst, work.get(row, src) / s);
            }
        }
        // v field holds V with a = U diag(s) V, i.e. the transpose of the
        // accumulated right-rotation product.
        for row in 0..n {
            v.set(dst, row, v_acc.get(row, src));
        }
    }
    if !zero_cols.is_empty() {
        complete_orthonormal(&mut u, &zero_cols);
    }

    Ok(SvdFactorization { u, singular_values: Vector::new(values)?, v })
}

fn column_moments(m: &Matrix, i: usize, j: usize) -> (f64, f64, f64) {
    let n = m.rows();
    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
    for row in 0..n {
        let a = m.get(row, i);
        let b = m.get(row, j);
        alpha += a * a;
        beta += b * b;
        gamma += a * b;
    }
    (alpha, beta, gamma)
}

fn rotate_columns(m: &mut Matrix, i: usize, j: usize, c: f64, s: f64) {
    let n = m.rows();
    for row in 0..n {
        let a = m.get(row, i);
        let b = m.get(row, j);
        m.set(row, i, c * a - s * b);
        m.set(row, j, s * a + c * b);
    }
}

// Fills the listed zero columns with unit vectors orthogonal to every other
// column (Gram-Schmidt against the rest), keeping u orthonormal when the
// input was rank-deficient.
fn complete_orthonormal(u: &mut Matrix, zero_cols: &[usize]) {
    let n = u.rows();
    let mut filled: Vec<usize> = (0..n).filter(|c| !zero_cols.contains(c)).collect();
    for &col in zero_cols {
        let mut best: Option<Vector> = None;
        for seed in 0..n {
            let mut cand = Vector::from_fn(n, |i| if i == seed { 1.0 } else { 0.0 });
            for &f in &filled {
                let existing = u.column(f);
                let proj = cand.dot(&existing);
                cand = cand.sub(&existing.scale(proj));
            }
            let norm = cand.norm();
            if norm > 1e-6 {
                best = Some(cand.scale(1.0 / norm));
                break;
            }
        }
        let dir = best.expect("orthonormal completion always exists");
        for row in 0..n {
            u.set(row, col, dir.get(row));
        }
        filled.push(col);
    }
}
