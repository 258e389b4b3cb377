//! Block-lower-triangular Construction-A lattice codec.
//!
//! The parity check F has a small full-row-rank block K repeated on the
//! diagonal and arbitrary coupling blocks A_ij below it. Encoding solves
//! `F X = [0; m]` block by block, picking the centered solution closest to
//! the origin in each block; the transmitted lattice point is `X / p`.
//! Decoding mirrors the recursion: exact nearest-candidate search per block
//! with successive interference cancellation.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Vector;
use crate::modp::{self, IntMat, ResidueOdometer};

/// Per-block coset enumeration refuses more members than this.
pub const KERNEL_ENUMERATION_CAP: u128 = 1_000_000;
/// Per-block decoder candidate cap.
pub const DECODER_CANDIDATE_CAP: u128 = 1_000_000;
/// Exhaustive-oracle caps: total dimension and residue count.
pub const ORACLE_DIM_CAP: usize = 12;
pub const ORACLE_POINT_CAP: u128 = 10_000_000;

#[derive(Debug, Error)]
pub enum BlockTriError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("block shape requires 1 <= r < b, got r={r}, b={b}")]
    BadBlockShape { r: usize, b: usize },
    #[error("zero_rows must satisfy 0 <= z < r, got z={z}, r={r}")]
    BadZeroRows { z: usize, r: usize },
    #[error("need at least one diagonal block")]
    NoBlocks,
    #[error("K must have full row rank {r} mod {p}, found rank {rank}")]
    RankDeficientCheck { r: usize, rank: usize, p: u64 },
    #[error("matrix entry {value} is outside 0..{p}")]
    EntryOutOfRange { value: u64, p: u64 },
    #[error("coupling block ({i},{j}) is invalid: {reason}")]
    BadCouplingBlock { i: usize, j: usize, reason: String },
    #[error("message has {got} symbols, expected {expected}")]
    MessageLength { got: usize, expected: usize },
    #[error("message symbol {0} is outside 0..{1}")]
    SymbolOutOfRange(u64, u64),
    #[error("block syndrome system has no solution; K lost full row rank")]
    NoSolution,
    #[error("coset size {size} exceeds the enumeration cap {cap}")]
    KernelTooLarge { size: u128, cap: u128 },
    #[error("per-block candidate count {count} exceeds the cap {cap}")]
    CandidateCap { count: u128, cap: u128 },
    #[error("instance size exceeds the exhaustive-oracle caps (dim {dim} <= {dim_cap}, points {points} <= {point_cap})")]
    SizeCap { dim: usize, dim_cap: usize, points: u128, point_cap: u128 },
    #[error("received vector has length {got}, expected {expected}")]
    ReceivedLength { got: usize, expected: usize },
    #[error("noise standard deviation must be nonnegative, got {0}")]
    NegativeSigma(f64),
}

/// Parameters of the block-lower-triangular lattice.
#[derive(Debug, Clone)]
pub struct BlockTriParams {
    p: u64,
    l: usize,
    b: usize,
    r: usize,
    z: usize,
    k_check: IntMat,
    a_blocks: BTreeMap<(usize, usize), IntMat>,
    /// Decoder lift window: candidates range over centered lifts shifted by
    /// up to this many periods.
    lift_window: i64,
}

/// A message: `r - z` symbols in `0..p` per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMessage {
    symbols: Vec<u64>,
}

impl BlockMessage {
    pub fn new(symbols: Vec<u64>) -> Self {
        Self { symbols }
    }

    pub fn symbols(&self) -> &[u64] {
        &self.symbols
    }
}

/// An encoded codeword: the integer solution and the scaled lattice point.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCodeword {
    /// Centered integer solution of `F X = [0; m] (mod p)`.
    pub x_int: Vec<i64>,
    /// Transmitted lattice point `x_int / p`.
    pub lattice_point: Vector,
}

impl BlockTriParams {
    /// Validates shapes, ranges, primality, and the rank of K.
    pub fn new(
        p: u64,
        l: usize,
        b: usize,
        r: usize,
        z: usize,
        k_entries: Vec<u64>,
        a_entries: BTreeMap<(usize, usize), Vec<u64>>,
    ) -> Result<Self, BlockTriError> {
        if !modp::is_prime(p) {
            return Err(BlockTriError::NotPrime(p));
        }
        if l == 0 {
            return Err(BlockTriError::NoBlocks);
        }
        if r == 0 || r >= b {
            return Err(BlockTriError::BadBlockShape { r, b });
        }
        if z >= r {
            return Err(BlockTriError::BadZeroRows { z, r });
        }
        let k_check = IntMat::new(r, b, k_entries)
            .ok_or(BlockTriError::BadBlockShape { r, b })?;
        if k_check.max_entry() >= p {
            return Err(BlockTriError::EntryOutOfRange { value: k_check.max_entry(), p });
        }
        let rank = modp::rank_mod_p(&k_check, p);
        if rank != r {
            return Err(BlockTriError::RankDeficientCheck { r, rank, p });
        }
        let mut a_blocks = BTreeMap::new();
        for ((i, j), entries) in a_entries {
            if !(1 <= j && j < i && i <= l) {
                return Err(BlockTriError::BadCouplingBlock {
                    i,
                    j,
                    reason: format!("indices must satisfy 1 <= j < i <= {l}"),
                });
            }
            let m = IntMat::new(r, b, entries).ok_or(BlockTriError::BadCouplingBlock {
                i,
                j,
                reason: format!("expected {r}x{b} entries"),
            })?;
            if m.max_entry() >= p {
                return Err(BlockTriError::EntryOutOfRange { value: m.max_entry(), p });
            }
            a_blocks.insert((i, j), m);
        }
        Ok(Self { p, l, b, r, z, k_check, a_blocks, lift_window: 1 })
    }

    /// Draws a random instance: K resampled to full row rank, coupling
    /// blocks i.i.d. uniform over Z_p.
    pub fn random(
        p: u64,
        l: usize,
        b: usize,
        r: usize,
        z: usize,
        rng: &mut ChaCha12Rng,
    ) -> Result<Self, BlockTriError> {
        let k_entries = loop {
            let cand: Vec<u64> = (0..r * b).map(|_| rng.random_range(0..p)).collect();
            let m = IntMat::new(r, b, cand.clone()).expect("sized entries");
            if modp::rank_mod_p(&m, p) == r {
                break cand;
            }
        };
        let mut a_entries = BTreeMap::new();
        for i in 2..=l {
            for j in 1..i {
                let entries: Vec<u64> = (0..r * b).map(|_| rng.random_range(0..p)).collect();
                a_entries.insert((i, j), entries);
            }
        }
        Self::new(p, l, b, r, z, k_entries, a_entries)
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn blocks(&self) -> usize {
        self.l
    }

    pub fn block_len(&self) -> usize {
        self.b
    }

    pub fn check_rows(&self) -> usize {
        self.r
    }

    pub fn zero_rows(&self) -> usize {
        self.z
    }

    /// Total lattice dimension `l * b`.
    pub fn dim(&self) -> usize {
        self.l * self.b
    }

    /// Message symbols carried per codeword: `l * (r - z)`.
    pub fn message_len(&self) -> usize {
        self.l * (self.r - self.z)
    }

    pub fn k_check(&self) -> &IntMat {
        &self.k_check
    }

    pub fn coupling_block(&self, i: usize, j: usize) -> Option<&IntMat> {
        self.a_blocks.get(&(i, j))
    }

    pub fn with_lift_window(mut self, window: i64) -> Self {
        assert!(window >= 0, "lift window must be nonnegative");
        self.lift_window = window;
        self
    }

    /// Assembles the full `l r x l b` parity-check matrix with K on the
    /// diagonal and the coupling blocks below it.
    pub fn assemble_f(&self) -> IntMat {
        let mut f = IntMat::zeros(self.l * self.r, self.l * self.b);
        for blk in 0..self.l {
            for row in 0..self.r {
                for col in 0..self.b {
                    f.set(blk * self.r + row, blk * self.b + col, self.k_check.get(row, col));
                }
            }
        }
        for (&(i, j), a) in &self.a_blocks {
            for row in 0..self.r {
                for col in 0..self.b {
                    f.set((i - 1) * self.r + row, (j - 1) * self.b + col, a.get(row, col));
                }
            }
        }
        f
    }

    fn check_message(&self, m: &BlockMessage) -> Result<(), BlockTriError> {
        if m.symbols.len() != self.message_len() {
            return Err(BlockTriError::MessageLength {
                got: m.symbols.len(),
                expected: self.message_len(),
            });
        }
        if let Some(&bad) = m.symbols.iter().find(|&&s| s >= self.p) {
            return Err(BlockTriError::SymbolOutOfRange(bad, self.p));
        }
        Ok(())
    }

    /// Uniform random message.
    pub fn random_message(&self, rng: &mut ChaCha12Rng) -> BlockMessage {
        BlockMessage::new((0..self.message_len()).map(|_| rng.random_range(0..self.p)).collect())
    }

    /// Padded syndrome `[0_z ; m_i]` of block `i` (0-based).
    fn padded_syndrome(&self, m: &BlockMessage, block: usize) -> Vec<u64> {
        let w = self.r - self.z;
        let mut s = vec![0u64; self.r];
        s[self.z..].copy_from_slice(&m.symbols[block * w..(block + 1) * w]);
        s
    }

    /// Interference of already-fixed blocks on block `i`:
    /// `sum_j A_(i+1)(j+1) X_j mod p`.
    fn interference(&self, decided: &[Vec<i64>], block: usize) -> Vec<u64> {
        let mut acc = vec![0i64; self.r];
        for (j, x_j) in decided.iter().enumerate().take(block) {
            if let Some(a) = self.a_blocks.get(&(block + 1, j + 1)) {
                let contrib = a.mul_vec_mod(x_j, self.p);
                for (t, &c) in acc.iter_mut().zip(&contrib) {
                    *t += c as i64;
                }
            }
        }
        acc.iter().map(|&t| modp::residue_of(t, self.p)).collect()
    }

    fn kernel(&self) -> Result<Vec<Vec<u64>>, BlockTriError> {
        let kernel = modp::kernel_basis_mod_p(&self.k_check, self.p);
        let size = (self.p as u128).pow(kernel.len() as u32);
        if size > KERNEL_ENUMERATION_CAP {
            return Err(BlockTriError::KernelTooLarge { size, cap: KERNEL_ENUMERATION_CAP });
        }
        Ok(kernel)
    }

    /// Minimum-norm centered lift over the solution coset of
    /// `K x = syndrome (mod p)`, ties broken lexicographically.
    fn closest_block_solution(
        &self,
        syndrome: &[u64],
        kernel: &[Vec<u64>],
    ) -> Result<Vec<i64>, BlockTriError> {
        let particular =
            modp::solve_mod_p(&self.k_check, syndrome, self.p).ok_or(BlockTriError::NoSolution)?;
        let mut best: Option<(i128, Vec<i64>)> = None;
        for combo in ResidueOdometer::new(kernel.len(), self.p) {
            let mut residue = particular.clone();
            for (weight, vec) in combo.iter().zip(kernel) {
                if *weight == 0 {
                    continue;
                }
                for (r, &v) in residue.iter_mut().zip(vec) {
                    *r = (*r + weight * v) % self.p;
                }
            }
            let lift: Vec<i64> = residue.iter().map(|&v| modp::centered_lift(v, self.p)).collect();
            let norm_sq: i128 = lift.iter().map(|&x| (x as i128) * (x as i128)).sum();
            let better = match &best {
                None => true,
                Some((bn, bl)) => norm_sq < *bn || (norm_sq == *bn && lift < *bl),
            };
            if better {
                best = Some((norm_sq, lift));
            }
        }
        Ok(best.expect("coset is nonempty").1)
    }

    /// Recursive encoder: per block, cancel interference from earlier blocks,
    /// then take the centered coset member closest to the origin.
    pub fn encode(&self, m: &BlockMessage) -> Result<BlockCodeword, BlockTriError> {
        self.check_message(m)?;
        let kernel = self.kernel()?;
        let mut blocks: Vec<Vec<i64>> = Vec::with_capacity(self.l);
        for i in 0..self.l {
            let padded = self.padded_syndrome(m, i);
            let interference = self.interference(&blocks, i);
            let syndrome: Vec<u64> = padded
                .iter()
                .zip(&interference)
                .map(|(&s, &t)| (s + self.p - t) % self.p)
                .collect();
            blocks.push(self.closest_block_solution(&syndrome, &kernel)?);
        }
        let x_int: Vec<i64> = blocks.concat();
        let lattice_point = Vector::from_fn(x_int.len(), |i| x_int[i] as f64 / self.p as f64);
        Ok(BlockCodeword { x_int, lattice_point })
    }

    /// Independent brute-force encoder: enumerate every centered residue
    /// vector satisfying the full congruence and take the per-block
    /// sequential minimum (norm, then lexicographic), exactly as the
    /// recursion defines it. Ground truth for property tests.
    pub fn encode_oracle(&self, m: &BlockMessage) -> Result<BlockCodeword, BlockTriError> {
        self.check_message(m)?;
        let n = self.dim();
        let points = (self.p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if n > ORACLE_DIM_CAP || points > ORACLE_POINT_CAP {
            return Err(BlockTriError::SizeCap {
                dim: n,
                dim_cap: ORACLE_DIM_CAP,
                points,
                point_cap: ORACLE_POINT_CAP,
            });
        }
        let f = self.assemble_f();
        let target: Vec<u64> = (0..self.l).flat_map(|i| self.padded_syndrome(m, i)).collect();
        let mut best: Option<Vec<i64>> = None;
        for residue in ResidueOdometer::new(n, self.p) {
            let lift: Vec<i64> = residue.iter().map(|&v| modp::centered_lift(v, self.p)).collect();
            if f.mul_vec_mod(&lift, self.p) != target {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => self.sequential_less(&lift, b),
            };
            if better {
                best = Some(lift);
            }
        }
        let x_int = best.ok_or(BlockTriError::NoSolution)?;
        let lattice_point = Vector::from_fn(x_int.len(), |i| x_int[i] as f64 / self.p as f64);
        Ok(BlockCodeword { x_int, lattice_point })
    }

    /// Block-sequential order: compare block norms first, then the block
    /// coordinates lexicographically, block by block.
    fn sequential_less(&self, a: &[i64], b: &[i64]) -> bool {
        for blk in 0..self.l {
            let xa = &a[blk * self.b..(blk + 1) * self.b];
            let xb = &b[blk * self.b..(blk + 1) * self.b];
            let na: i128 = xa.iter().map(|&x| (x as i128) * (x as i128)).sum();
            let nb: i128 = xb.iter().map(|&x| (x as i128) * (x as i128)).sum();
            if na != nb {
                return na < nb;
            }
            if xa != xb {
                return xa < xb;
            }
        }
        false
    }

    /// Sequential block decoder with interference cancellation: every
    /// syndrome completion, coset member, and lift-window shift is scored
    /// against the received block; the best candidate fixes the block and
    /// its implied message symbols.
    pub fn decode(&self, y: &Vector, noise_std: f64) -> Result<BlockMessage, BlockTriError> {
        if y.len() != self.dim() {
            return Err(BlockTriError::ReceivedLength { got: y.len(), expected: self.dim() });
        }
        if noise_std < 0.0 {
            return Err(BlockTriError::NegativeSigma(noise_std));
        }
        let kernel = self.kernel()?;
        let w = self.r - self.z;
        let window = 2 * self.lift_window as u128 + 1;
        let count = (self.p as u128).pow((w + kernel.len()) as u32) * window.pow(self.b as u32);
        if count > DECODER_CANDIDATE_CAP {
            return Err(BlockTriError::CandidateCap { count, cap: DECODER_CANDIDATE_CAP });
        }

        let mut decided: Vec<Vec<i64>> = Vec::with_capacity(self.l);
        let mut message = Vec::with_capacity(self.message_len());
        for i in 0..self.l {
            let y_block: Vec<f64> =
                (i * self.b..(i + 1) * self.b).map(|t| y.get(t)).collect();
            let interference = self.interference(&decided, i);
            let mut best: Option<(f64, Vec<i64>, Vec<u64>)> = None;
            for msg in ResidueOdometer::new(w, self.p) {
                let mut padded = vec![0u64; self.r];
                padded[self.z..].copy_from_slice(&msg);
                let syndrome: Vec<u64> = padded
                    .iter()
                    .zip(&interference)
                    .map(|(&s, &t)| (s + self.p - t) % self.p)
                    .collect();
                let particular = modp::solve_mod_p(&self.k_check, &syndrome, self.p)
                    .ok_or(BlockTriError::NoSolution)?;
                for combo in ResidueOdometer::new(kernel.len(), self.p) {
                    let mut residue = particular.clone();
                    for (weight, vec) in combo.iter().zip(kernel.iter()) {
                        if *weight == 0 {
                            continue;
                        }
                        for (r, &v) in residue.iter_mut().zip(vec) {
                            *r = (*r + weight * v) % self.p;
                        }
                    }
                    let base: Vec<i64> =
                        residue.iter().map(|&v| modp::centered_lift(v, self.p)).collect();
                    for shift in
                        ShiftOdometer::new(self.b, self.lift_window)
                    {
                        let cand: Vec<i64> = base
                            .iter()
                            .zip(&shift)
                            .map(|(&c, &s)| c + s * self.p as i64)
                            .collect();
                        let mut dist_sq = 0.0;
                        for (t, &c) in y_block.iter().zip(&cand) {
                            let d = t - c as f64 / self.p as f64;
                            dist_sq += d * d;
                        }
                        let better = match &best {
                            None => true,
                            Some((bd, bc, _)) => {
                                dist_sq < *bd || (dist_sq == *bd && cand < *bc)
                            }
                        };
                        if better {
                            best = Some((dist_sq, cand, msg.clone()));
                        }
                    }
                }
            }
            let (_, cand, msg) = best.expect("candidate set is nonempty");
            decided.push(cand);
            message.extend(msg);
        }
        Ok(BlockMessage::new(message))
    }

    /// Minimum distance of the zero-syndrome sublattice, exhaustively over
    /// centered residues. Integer shifts alone give distance 1, so the
    /// result is capped there.
    pub fn min_distance_estimate(&self) -> Result<f64, BlockTriError> {
        let n = self.dim();
        let points = (self.p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if n > ORACLE_DIM_CAP || points > ORACLE_POINT_CAP {
            return Err(BlockTriError::SizeCap {
                dim: n,
                dim_cap: ORACLE_DIM_CAP,
                points,
                point_cap: ORACLE_POINT_CAP,
            });
        }
        let f = self.assemble_f();
        let zero = vec![0u64; self.l * self.r];
        let mut best: Option<i128> = None;
        for residue in ResidueOdometer::new(n, self.p) {
            let lift: Vec<i64> = residue.iter().map(|&v| modp::centered_lift(v, self.p)).collect();
            if lift.iter().all(|&x| x == 0) {
                continue;
            }
            if f.mul_vec_mod(&lift, self.p) != zero {
                continue;
            }
            let norm_sq: i128 = lift.iter().map(|&x| (x as i128) * (x as i128)).sum();
            if best.map_or(true, |b| norm_sq < b) {
                best = Some(norm_sq);
            }
        }
        let from_residues =
            best.map(|n2| (n2 as f64).sqrt() / self.p as f64).unwrap_or(f64::INFINITY);
        Ok(from_residues.min(1.0))
    }

    /// Congruence check: does `F x = [0; m] (mod p)` hold exactly.
    pub fn satisfies_congruence(&self, x_int: &[i64], m: &BlockMessage) -> bool {
        if x_int.len() != self.dim() || self.check_message(m).is_err() {
            return false;
        }
        let f = self.assemble_f();
        let target: Vec<u64> = (0..self.l).flat_map(|i| self.padded_syndrome(m, i)).collect();
        f.mul_vec_mod(x_int, self.p) == target
    }

    /// Reads the message symbols out of an exact lattice point, or `None`
    /// when the point is not a message-carrying lattice point.
    pub fn message_of_point(&self, point: &Vector, tol: f64) -> Option<BlockMessage> {
        if point.len() != self.dim() {
            return None;
        }
        let mut x_int = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let scaled = point.get(i) * self.p as f64;
            let nearest = scaled.round();
            if (scaled - nearest).abs() > tol {
                return None;
            }
            x_int.push(nearest as i64);
        }
        let f = self.assemble_f();
        let syndrome = f.mul_vec_mod(&x_int, self.p);
        let w = self.r - self.z;
        let mut symbols = Vec::with_capacity(self.message_len());
        for blk in 0..self.l {
            let rows = &syndrome[blk * self.r..(blk + 1) * self.r];
            if rows[..self.z].iter().any(|&v| v != 0) {
                return None;
            }
            symbols.extend_from_slice(&rows[self.z..self.z + w]);
        }
        Some(BlockMessage::new(symbols))
    }
}

/// Odometer over `{-window..window}^len`.
struct ShiftOdometer {
    current: Vec<i64>,
    window: i64,
    done: bool,
}

impl ShiftOdometer {
    fn new(len: usize, window: i64) -> Self {
        Self { current: vec![-window; len], window, done: false }
    }
}

impl Iterator for ShiftOdometer {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
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
            if self.current[i] <= self.window {
                break;
            }
            self.current[i] = -self.window;
            i += 1;
        }
        Some(out)
    }
}

/// Serializable form of [`BlockTriParams`]: K and the coupling blocks as
/// row-major entry lists.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct BlockTriConfig {
    pub p: u64,
    pub l: usize,
    pub b: usize,
    pub r: usize,
    pub z: usize,
    pub k_entries: Vec<u64>,
    #[serde(default)]
    pub a_blocks: Vec<CouplingBlockConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CouplingBlockConfig {
    pub i: usize,
    pub j: usize,
    pub entries: Vec<u64>,
}

impl BlockTriConfig {
    pub fn build(&self) -> Result<BlockTriParams, BlockTriError> {
        let mut a_entries = BTreeMap::new();
        for blk in &self.a_blocks {
            a_entries.insert((blk.i, blk.j), blk.entries.clone());
        }
        BlockTriParams::new(self.p, self.l, self.b, self.r, self.z, self.k_entries.clone(), a_entries)
    }
}

impl BlockTriParams {
    pub fn to_config(&self) -> BlockTriConfig {
        BlockTriConfig {
            p: self.p,
            l: self.l,
            b: self.b,
            r: self.r,
            z: self.z,
            k_entries: self.k_check.as_slice().to_vec(),
            a_blocks: self
                .a_blocks
                .iter()
                .map(|(&(i, j), m)| CouplingBlockConfig { i, j, entries: m.as_slice().to_vec() })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RngStream;
    use std::collections::BTreeMap;

    fn single_block_p3() -> BlockTriParams {
        // p=3, l=1, K=[1 1], r=1, b=2, z=0.
        BlockTriParams::new(3, 1, 2, 1, 0, vec![1, 1], BTreeMap::new()).unwrap()
    }

    /// The frozen two-block instance used across the test suite.
    pub(crate) fn default_instance(l: usize) -> BlockTriParams {
        let mut a = BTreeMap::new();
        for i in 2..=l {
            for j in 1..i {
                a.insert((i, j), vec![3, 1, 4, 2, 0, 2, 1, 3]);
            }
        }
        BlockTriParams::new(5, l, 4, 2, 1, vec![1, 2, 3, 4, 2, 1, 4, 3], a).unwrap()
    }

    #[test]
    fn construction_validation() {
        assert!(matches!(
            BlockTriParams::new(4, 1, 2, 1, 0, vec![1, 1], BTreeMap::new()),
            Err(BlockTriError::NotPrime(4))
        ));
        // b=1 forces r < b to fail.
        assert!(matches!(
            BlockTriParams::new(3, 1, 1, 1, 0, vec![1], BTreeMap::new()),
            Err(BlockTriError::BadBlockShape { .. })
        ));
        assert!(matches!(
            BlockTriParams::new(3, 1, 2, 1, 1, vec![1, 1], BTreeMap::new()),
            Err(BlockTriError::BadZeroRows { .. })
        ));
        // Rank-deficient K: two proportional rows mod 5.
        assert!(matches!(
            BlockTriParams::new(5, 1, 3, 2, 0, vec![1, 2, 3, 2, 4, 1], BTreeMap::new()),
            Err(BlockTriError::RankDeficientCheck { .. })
        ));
    }

    #[test]
    fn assemble_f_single_block_is_k() {
        let params = single_block_p3();
        let f = params.assemble_f();
        assert_eq!(f, *params.k_check());
    }

    #[test]
    fn assemble_f_zero_coupling_is_block_diagonal() {
        let params = BlockTriParams::new(3, 2, 2, 1, 0, vec![1, 1], BTreeMap::new()).unwrap();
        let f = params.assemble_f();
        assert_eq!(f.rows(), 2);
        assert_eq!(f.cols(), 4);
        assert_eq!(f.get(0, 0), 1);
        assert_eq!(f.get(0, 1), 1);
        assert_eq!(f.get(1, 2), 1);
        assert_eq!(f.get(1, 3), 1);
        assert_eq!(f.get(0, 2), 0);
        assert_eq!(f.get(1, 0), 0);
    }

    #[test]
    fn assemble_f_upper_blocks_are_zero() {
        let mut rng = RngStream::new(50, 0).rng();
        let params = BlockTriParams::random(5, 3, 3, 1, 0, &mut rng).unwrap();
        let f = params.assemble_f();
        for i in 0..3usize {
            for j in (i + 1)..3usize {
                for row in 0..1 {
                    for col in 0..3 {
                        assert_eq!(f.get(i + row, j * 3 + col), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn encode_zero_message_gives_origin() {
        let params = default_instance(3);
        let m = BlockMessage::new(vec![0; params.message_len()]);
        let cw = params.encode(&m).unwrap();
        assert!(cw.x_int.iter().all(|&x| x == 0));
        assert!(cw.lattice_point.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn encode_worked_example_p3() {
        // Solutions of x1+x2 = 1 mod 3 are {(0,1),(1,0),(2,2)}; centered
        // lifts {(0,1),(1,0),(-1,-1)}; the norm-1 tie resolves to (0,1).
        let params = single_block_p3();
        let cw = params.encode(&BlockMessage::new(vec![1])).unwrap();
        assert_eq!(cw.x_int, vec![0, 1]);
        assert!((cw.lattice_point.get(0) - 0.0).abs() < 1e-15);
        assert!((cw.lattice_point.get(1) - 1.0 / 3.0).abs() < 1e-15);

        let oracle = params.encode_oracle(&BlockMessage::new(vec![1])).unwrap();
        assert_eq!(oracle.x_int, cw.x_int);
    }

    #[test]
    fn encode_matches_oracle_on_random_instances() {
        let mut rng = RngStream::new(51, 0).rng();
        let mut checked = 0;
        while checked < 100 {
            let p = [2u64, 3, 5][rng.random_range(0..3usize)];
            let b = rng.random_range(2..=4usize);
            let r = rng.random_range(1..b);
            let z = rng.random_range(0..r);
            let l = rng.random_range(1..=3usize);
            if (p as u128).pow((l * b) as u32) > 600_000 {
                continue;
            }
            let params = BlockTriParams::random(p, l, b, r, z, &mut rng).unwrap();
            let m = params.random_message(&mut rng);
            let fast = params.encode(&m).unwrap();
            let slow = params.encode_oracle(&m).unwrap();
            assert_eq!(fast.x_int, slow.x_int, "p={p} l={l} b={b} r={r} z={z}");
            assert!(params.satisfies_congruence(&fast.x_int, &m));
            checked += 1;
        }
    }

    #[test]
    fn syndromes_add_mod_p() {
        let params = default_instance(2);
        let mut rng = RngStream::new(52, 0).rng();
        let f = params.assemble_f();
        for _ in 0..20 {
            let m1 = params.random_message(&mut rng);
            let m2 = params.random_message(&mut rng);
            let sum = BlockMessage::new(
                m1.symbols().iter().zip(m2.symbols()).map(|(&a, &b)| (a + b) % 5).collect(),
            );
            let c1 = params.encode(&m1).unwrap();
            let c2 = params.encode(&m2).unwrap();
            let cs = params.encode(&sum).unwrap();
            let s1 = f.mul_vec_mod(&c1.x_int, 5);
            let s2 = f.mul_vec_mod(&c2.x_int, 5);
            let ss = f.mul_vec_mod(&cs.x_int, 5);
            let added: Vec<u64> = s1.iter().zip(&s2).map(|(&a, &b)| (a + b) % 5).collect();
            assert_eq!(added, ss);
        }
    }

    #[test]
    fn decode_round_trips_at_zero_noise() {
        let mut rng = RngStream::new(53, 0).rng();
        for trial in 0..100 {
            let p = [2u64, 3, 5][rng.random_range(0..3usize)];
            let b = rng.random_range(2..=4usize);
            let r = rng.random_range(1..b);
            let z = rng.random_range(0..r);
            let l = rng.random_range(1..=2usize);
            let params = BlockTriParams::random(p, l, b, r, z, &mut rng).unwrap();
            let m = params.random_message(&mut rng);
            let cw = params.encode(&m).unwrap();
            let decoded = params.decode(&cw.lattice_point, 0.0).unwrap();
            assert_eq!(decoded, m, "trial {trial}: p={p} l={l} b={b} r={r} z={z}");
        }
    }

    #[test]
    fn decode_survives_small_noise() {
        use rand_distr::Distribution;
        let params = BlockTriParams::new(3, 2, 2, 1, 0, vec![1, 1], {
            let mut a = BTreeMap::new();
            a.insert((2, 1), vec![2, 1]);
            a
        })
        .unwrap();
        let sigma = 0.01 / 3.0;
        let mut rng = RngStream::new(54, 0).rng();
        let mut wrong = 0;
        for _ in 0..1000 {
            let m = params.random_message(&mut rng);
            let cw = params.encode(&m).unwrap();
            let noisy = Vector::from_fn(cw.lattice_point.len(), |i| {
                let draw: f64 = rand_distr::StandardNormal.sample(&mut rng);
                cw.lattice_point.get(i) + sigma * draw
            });
            if params.decode(&noisy, sigma).unwrap() != m {
                wrong += 1;
            }
        }
        assert!(wrong <= 1, "{wrong}/1000 decoding failures");
    }

    #[test]
    fn min_distance_single_block_closed_form() {
        // Zero-syndrome solutions of [1 1] mod 3: centered nonzero minimum is
        // (1,-1), norm sqrt(2), scaled by 1/3.
        let params = single_block_p3();
        let d = params.min_distance_estimate().unwrap();
        assert!((d - 2.0_f64.sqrt() / 3.0).abs() < 1e-12);
        assert!(d <= 1.0);
    }

    #[test]
    fn min_distance_shrinks_with_larger_modulus() {
        let p3 = BlockTriParams::new(3, 1, 2, 1, 0, vec![1, 1], BTreeMap::new()).unwrap();
        let p5 = BlockTriParams::new(5, 1, 2, 1, 0, vec![1, 1], BTreeMap::new()).unwrap();
        assert!(p5.min_distance_estimate().unwrap() <= p3.min_distance_estimate().unwrap());
    }

    #[test]
    fn config_round_trip() {
        let params = default_instance(2);
        let config = params.to_config();
        let text = toml::to_string(&config).unwrap();
        let back: BlockTriConfig = toml::from_str(&text).unwrap();
        assert_eq!(config, back);
        let rebuilt = back.build().unwrap();
        assert_eq!(rebuilt.assemble_f(), params.assemble_f());
    }

    #[test]
    fn message_of_point_inverts_encoding() {
        let params = default_instance(2);
        let mut rng = RngStream::new(55, 0).rng();
        for _ in 0..50 {
            let m = params.random_message(&mut rng);
            let cw = params.encode(&m).unwrap();
            assert_eq!(params.message_of_point(&cw.lattice_point, 1e-9), Some(m));
        }
        // Off-lattice points are rejected.
        assert_eq!(params.message_of_point(&Vector::from_fn(8, |_| 0.123), 1e-9), None);
    }
}
