//! Construction-A lattices: a mod-p linear code lifted to a real lattice,
//! `p^{-1} (gen . Z_p^k) + Z^n`, with membership testing and a real basis
//! embedding.

use thiserror::Error;

use crate::lattice::{Lattice, LatticeError};
use crate::linalg::Matrix;
use crate::modp::{self, IntMat};

#[derive(Debug, Error)]
pub enum ConstructionAError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("generator entry {value} at ({row},{col}) is outside 0..{p}")]
    EntryOutOfRange { row: usize, col: usize, value: u64, p: u64 },
    #[error("generator shape {rows}x{cols} does not match n={n}, k={k}")]
    BadShape { rows: usize, cols: usize, n: usize, k: usize },
    #[error("k={k} must not exceed n={n}")]
    TooManyColumns { k: usize, n: usize },
    #[error("column reduction mod p failed to produce a systematic form")]
    ReductionFailure,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A Construction-A lattice given by an n x k generator over Z_p.
#[derive(Debug, Clone)]
pub struct ConstructionA {
    gen: IntMat,
    p: u64,
    n: usize,
    k: usize,
}

impl ConstructionA {
    pub fn new(n: usize, k: usize, p: u64, gen_entries: Vec<u64>) -> Result<Self, ConstructionAError> {
        if !modp::is_prime(p) {
            return Err(ConstructionAError::NotPrime(p));
        }
        if k > n {
            return Err(ConstructionAError::TooManyColumns { k, n });
        }
        let gen = IntMat::new(n, k, gen_entries)
            .ok_or(ConstructionAError::BadShape { rows: 0, cols: 0, n, k })?;
        for i in 0..n {
            for j in 0..k {
                let value = gen.get(i, j);
                if value >= p {
                    return Err(ConstructionAError::EntryOutOfRange { row: i, col: j, value, p });
                }
            }
        }
        Ok(Self { gen, p, n, k })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn code_dim(&self) -> usize {
        self.k
    }

    pub fn generator(&self) -> &IntMat {
        &self.gen
    }

    /// Membership test: `x` is in the lattice iff `p x` is integral within
    /// `tol` and its residue mod p lies in the column span of the generator.
    pub fn contains(&self, x: &crate::linalg::Vector, tol: f64) -> bool {
        if x.len() != self.n {
            return false;
        }
        let mut residue = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let scaled = x.get(i) * self.p as f64;
            let nearest = scaled.round();
            if (scaled - nearest).abs() > tol {
                return false;
            }
            residue.push(modp::residue_of(nearest as i64, self.p));
        }
        modp::solve_mod_p(&self.gen, &residue, self.p).is_some()
    }

    /// Real n x n basis generating exactly this lattice: column-reduce the
    /// generator mod p to systematic form (permuting coordinates as needed),
    /// assemble the triangular embedding, and undo the permutation.
    pub fn basis(&self) -> Result<Lattice, ConstructionAError> {
        let n = self.n;
        let p = self.p as f64;
        if self.k == 0 {
            return Ok(Lattice::standard(n));
        }

        // Row space of gen^t = column space of gen; its RREF rows give a
        // reduced generating set with identity entries on the pivot rows.
        let rref = modp::rref_mod_p(&self.gen.transpose(), self.p);
        let rank = rref.rank();
        let pivot_rows = rref.pivot_cols.clone();
        if pivot_rows.iter().any(|&r| r >= n) {
            return Err(ConstructionAError::ReductionFailure);
        }

        // Coordinate permutation putting pivot rows first.
        let mut order: Vec<usize> = pivot_rows.clone();
        order.extend((0..n).filter(|r| !pivot_rows.contains(r)));

        // Permuted basis: [ (1/p) I_rank        0       ]
        //                 [ (1/p) M         I_(n-rank)  ]
        // where M holds the reduced generator entries on non-pivot rows.
        let mut permuted = Matrix::zeros(n, n);
        for c in 0..rank {
            for (new_row, &old_row) in order.iter().enumerate() {
                permuted.set(new_row, c, rref.mat.get(c, old_row) as f64 / p);
            }
        }
        for c in rank..n {
            permuted.set(c, c, 1.0);
        }

        // Undo the permutation so coordinates match the original generator.
        let mut basis = Matrix::zeros(n, n);
        for (new_row, &old_row) in order.iter().enumerate() {
            for c in 0..n {
                basis.set(old_row, c, permuted.get(new_row, c));
            }
        }
        Ok(Lattice::new(basis)?)
    }
}
