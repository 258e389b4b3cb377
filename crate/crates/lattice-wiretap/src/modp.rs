//! Small dense matrices over the prime field Z_p and the elimination
//! routines the lattice constructions need. Entries are kept reduced to
//! `0..p`.

/// Trial-division primality check; moduli here are small by design.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Multiplicative inverse mod p (p prime), `None` for zero.
pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return None;
    }
    // Extended Euclid on (a, p).
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(p as i128) as u64)
}

/// Representative of `x` mod p in `0..p`.
#[inline]
pub fn residue_of(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

/// Centered lift of a residue into the window `(-p/2, p/2]`.
#[inline]
pub fn centered_lift(residue: u64, p: u64) -> i64 {
    debug_assert!(residue < p);
    if 2 * residue > p {
        residue as i64 - p as i64
    } else {
        residue as i64
    }
}

/// Dense matrix over Z_p, row-major, entries reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl IntMat {
    pub fn new(rows: usize, cols: usize, data: Vec<u64>) -> Option<Self> {
        if data.len() != rows * cols {
            return None;
        }
        Some(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    pub fn max_entry(&self) -> u64 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    pub fn transpose(&self) -> IntMat {
        let mut out = IntMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// `self * x mod p` for an integer vector `x` (entries may be negative).
    pub fn mul_vec_mod(&self, x: &[i64], p: u64) -> Vec<u64> {
        assert_eq!(x.len(), self.cols, "mul_vec_mod length mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc: i128 = 0;
                for j in 0..self.cols {
                    acc += self.get(i, j) as i128 * x[j] as i128;
                }
                acc.rem_euclid(p as i128) as u64
            })
            .collect()
    }
}

/// Reduced row echelon form mod p together with pivot bookkeeping.
pub struct Rref {
    pub mat: IntMat,
    pub pivot_cols: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }
}

pub fn rref_mod_p(a: &IntMat, p: u64) -> Rref {
    let mut m = a.clone();
    for v in &mut m.data {
        *v %= p;
    }
    let (rows, cols) = (m.rows, m.cols);
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(pivot_row) = (row..rows).find(|&i| m.get(i, col) != 0) else {
            continue;
        };
        if pivot_row != row {
            for k in 0..cols {
                let tmp = m.get(row, k);
                m.set(row, k, m.get(pivot_row, k));
                m.set(pivot_row, k, tmp);
            }
        }
        let inv = inv_mod(m.get(row, col), p).expect("nonzero pivot in prime field");
        for k in 0..cols {
            m.set(row, k, m.get(row, k) * inv % p);
        }
        for i in 0..rows {
            if i == row {
                continue;
            }
            let factor = m.get(i, col);
            if factor == 0 {
                continue;
            }
            for k in 0..cols {
                let v = (m.get(i, k) + (p - factor % p) * m.get(row, k)) % p;
                m.set(i, k, v);
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    Rref { mat: m, pivot_cols }
}

pub fn rank_mod_p(a: &IntMat, p: u64) -> usize {
    rref_mod_p(a, p).rank()
}

/// Particular solution of `a x = b (mod p)` with free variables at zero;
/// `None` when the system is inconsistent.
pub fn solve_mod_p(a: &IntMat, b: &[u64], p: u64) -> Option<Vec<u64>> {
    assert_eq!(b.len(), a.rows(), "solve_mod_p rhs length mismatch");
    let mut aug = IntMat::zeros(a.rows(), a.cols() + 1);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            aug.set(i, j, a.get(i, j));
        }
        aug.set(i, a.cols(), b[i] % p);
    }
    let rref = rref_mod_p(&aug, p);
    if rref.pivot_cols.contains(&a.cols()) {
        return None;
    }
    let mut x = vec![0u64; a.cols()];
    for (row, &col) in rref.pivot_cols.iter().enumerate() {
        x[col] = rref.mat.get(row, a.cols());
    }
    Some(x)
}

/// Basis of the nullspace of `a` mod p, one vector per free column.
pub fn kernel_basis_mod_p(a: &IntMat, p: u64) -> Vec<Vec<u64>> {
    let rref = rref_mod_p(a, p);
    let cols = a.cols();
    let mut basis = Vec::new();
    for free in 0..cols {
        if rref.pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for (row, &piv) in rref.pivot_cols.iter().enumerate() {
            let coeff = rref.mat.get(row, free);
            if coeff != 0 {
                v[piv] = (p - coeff) % p;
            }
        }
        basis.push(v);
    }
    basis
}

/// Walks every vector in `0..p`^len, in odometer order.
pub struct ResidueOdometer {
    current: Vec<u64>,
    p: u64,
    done: bool,
}

impl ResidueOdometer {
    pub fn new(len: usize, p: u64) -> Self {
        Self { current: vec![0; len], p, done: false }
    }
}

impl Iterator for ResidueOdometer {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut i = 0;
        loop {
            if i == self.current.len() {
                self.done = true;
                break;
            }
            self.current[i] += 1;
            if self.current[i] < self.p {
                break;
            }
            self.current[i] = 0;
            i += 1;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_small_values() {
        let primes: Vec<u64> = (0..30).filter(|&x| is_prime(x)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn modular_inverse_round_trip() {
        for p in [2u64, 3, 5, 7, 13] {
            for a in 1..p {
                let inv = inv_mod(a, p).unwrap();
                assert_eq!(a * inv % p, 1);
            }
            assert_eq!(inv_mod(0, p), None);
        }
    }

    #[test]
    fn centered_lift_window() {
        assert_eq!(centered_lift(0, 5), 0);
        assert_eq!(centered_lift(2, 5), 2);
        assert_eq!(centered_lift(3, 5), -2);
        assert_eq!(centered_lift(4, 5), -1);
        assert_eq!(centered_lift(1, 2), 1);
        assert_eq!(residue_of(-2, 5), 3);
        assert_eq!(residue_of(7, 5), 2);
    }

    #[test]
    fn rref_rank_and_solve() {
        // [1 2 3; 2 4 6] has rank 1 mod 5.
        let a = IntMat::new(2, 3, vec![1, 2, 3, 2, 4, 6 % 5]).unwrap();
        assert_eq!(rank_mod_p(&a, 5), 1);

        let k = IntMat::new(1, 2, vec![1, 1]).unwrap();
        let x = solve_mod_p(&k, &[1], 3).unwrap();
        assert_eq!(k.mul_vec_mod(&x.iter().map(|&v| v as i64).collect::<Vec<_>>(), 3), vec![1]);

        // Inconsistent system: 0 x = 1.
        let zero = IntMat::new(1, 1, vec![0]).unwrap();
        assert_eq!(solve_mod_p(&zero, &[1], 3), None);
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let a = IntMat::new(2, 4, vec![1, 2, 3, 4, 2, 1, 4, 3]).unwrap();
        let p = 5;
        let kernel = kernel_basis_mod_p(&a, p);
        assert_eq!(kernel.len(), 2);
        for v in &kernel {
            let iv: Vec<i64> = v.iter().map(|&x| x as i64).collect();
            assert_eq!(a.mul_vec_mod(&iv, p), vec![0, 0]);
        }
    }

    #[test]
    fn odometer_counts_all_vectors() {
        let all: Vec<Vec<u64>> = ResidueOdometer::new(3, 3).collect();
        assert_eq!(all.len(), 27);
        assert_eq!(all[0], vec![0, 0, 0]);
        assert_eq!(all[26], vec![2, 2, 2]);
    }
}
