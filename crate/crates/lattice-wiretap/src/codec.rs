//! Message-to-lattice-point codecs behind a common interface: the
//! block-triangular codec carrying the structured decoder, and a plain
//! lattice codec (coordinates reduced mod q, Babai decoding) for baselines.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::blocktri::{BlockMessage, BlockTriError, BlockTriParams};
use crate::construction_a::{ConstructionA, ConstructionAError};
use crate::lattice::{Lattice, LatticeError};
use crate::linalg::{Matrix, Vector};
use crate::modp::{self, IntMat};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("message has {got} symbols, expected {expected}")]
    MessageLength { got: usize, expected: usize },
    #[error("message symbol {0} is outside 0..{1}")]
    SymbolOutOfRange(u64, u64),
    #[error(transparent)]
    BlockTri(#[from] BlockTriError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    ConstructionA(#[from] ConstructionAError),
}

/// A codec that maps fixed-length symbol messages onto lattice points and
/// decodes noisy points back with its structured (polynomial-time) decoder.
pub trait LatticeCodec {
    /// Ambient dimension of the lattice points.
    fn dim(&self) -> usize;
    /// Symbols per message.
    fn message_len(&self) -> usize;
    /// Symbols live in `0..symbol_modulus()`.
    fn symbol_modulus(&self) -> u64;
    /// Maps a message to its lattice point.
    fn encode_message(&self, m: &[u64]) -> Result<Vector, CodecError>;
    /// Structured decode of a (noisy) point back to a message.
    fn decode_point(&self, y: &Vector) -> Result<Vec<u64>, CodecError>;
    /// Basis of the lattice containing every message point.
    fn generator(&self) -> Result<Matrix, CodecError>;
    /// Inverts an exact lattice point back to its message, when possible.
    fn message_of_point(&self, point: &Vector) -> Option<Vec<u64>>;
    /// Minimum distance of the codeword lattice (exhaustive; capped).
    fn min_distance(&self) -> Result<f64, CodecError>;

    /// Uniform random message.
    fn random_message(&self, rng: &mut ChaCha12Rng) -> Vec<u64> {
        let q = self.symbol_modulus();
        (0..self.message_len()).map(|_| rng.random_range(0..q)).collect()
    }
}

/// The block-lower-triangular Construction-A codec.
#[derive(Debug, Clone)]
pub struct BlockTriCodec {
    params: BlockTriParams,
    /// Decoder noise hint forwarded to the block decoder.
    noise_std: f64,
}

impl BlockTriCodec {
    pub fn new(params: BlockTriParams) -> Self {
        Self { params, noise_std: 0.0 }
    }

    pub fn with_noise_hint(mut self, noise_std: f64) -> Self {
        self.noise_std = noise_std;
        self
    }

    pub fn params(&self) -> &BlockTriParams {
        &self.params
    }
}

impl LatticeCodec for BlockTriCodec {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn message_len(&self) -> usize {
        self.params.message_len()
    }

    fn symbol_modulus(&self) -> u64 {
        self.params.modulus()
    }

    fn encode_message(&self, m: &[u64]) -> Result<Vector, CodecError> {
        let cw = self.params.encode(&BlockMessage::new(m.to_vec()))?;
        Ok(cw.lattice_point)
    }

    fn decode_point(&self, y: &Vector) -> Result<Vec<u64>, CodecError> {
        let decoded = self.params.decode(y, self.noise_std)?;
        Ok(decoded.symbols().to_vec())
    }

    /// Basis of the lattice of all message-carrying points: the kernel of
    /// the pinned-to-zero syndrome rows, lifted through Construction A.
    fn generator(&self) -> Result<Matrix, CodecError> {
        let p = self.params.modulus();
        let n = self.params.dim();
        let l = self.params.blocks();
        let r = self.params.check_rows();
        let z = self.params.zero_rows();
        let f = self.params.assemble_f();
        // Keep only the z zero-pinned rows of each block.
        let mut pinned = IntMat::zeros(l * z, n);
        for blk in 0..l {
            for row in 0..z {
                for col in 0..n {
                    pinned.set(blk * z + row, col, f.get(blk * r + row, col));
                }
            }
        }
        let kernel = modp::kernel_basis_mod_p(&pinned, p);
        let mut gen = IntMat::zeros(n, kernel.len());
        for (j, v) in kernel.iter().enumerate() {
            for (i, &x) in v.iter().enumerate() {
                gen.set(i, j, x);
            }
        }
        let ca = ConstructionA::new(n, kernel.len(), p, gen.as_slice().to_vec())?;
        Ok(ca.basis()?.basis().clone())
    }

    fn message_of_point(&self, point: &Vector) -> Option<Vec<u64>> {
        self.params.message_of_point(point, 1e-6).map(|m| m.symbols().to_vec())
    }

    fn min_distance(&self) -> Result<f64, CodecError> {
        Ok(self.params.min_distance_estimate()?)
    }
}

/// Plain lattice codec: symbols are centered basis coordinates mod q,
/// decoded by Babai rounding. Exact for orthogonal bases.
#[derive(Debug, Clone)]
pub struct PlainLatticeCodec {
    lattice: Lattice,
    q: u64,
}

impl PlainLatticeCodec {
    pub fn new(lattice: Lattice, q: u64) -> Self {
        assert!(q >= 2, "symbol modulus must be at least 2");
        Self { lattice, q }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
}

impl LatticeCodec for PlainLatticeCodec {
    fn dim(&self) -> usize {
        self.lattice.dim()
    }

    fn message_len(&self) -> usize {
        self.lattice.dim()
    }

    fn symbol_modulus(&self) -> u64 {
        self.q
    }

    fn encode_message(&self, m: &[u64]) -> Result<Vector, CodecError> {
        if m.len() != self.message_len() {
            return Err(CodecError::MessageLength { got: m.len(), expected: self.message_len() });
        }
        if let Some(&bad) = m.iter().find(|&&s| s >= self.q) {
            return Err(CodecError::SymbolOutOfRange(bad, self.q));
        }
        let coords: Vec<i64> = m.iter().map(|&s| modp::centered_lift(s, self.q)).collect();
        Ok(self.lattice.point_at(&coords)?)
    }

    fn decode_point(&self, y: &Vector) -> Result<Vec<u64>, CodecError> {
        let q = self.lattice.babai_round(y)?;
        Ok(q.coords.iter().map(|&c| c.rem_euclid(self.q as i64) as u64).collect())
    }

    fn generator(&self) -> Result<Matrix, CodecError> {
        Ok(self.lattice.basis().clone())
    }

    fn message_of_point(&self, point: &Vector) -> Option<Vec<u64>> {
        let coords = self.lattice.basis_inv().mul_vec(point).ok()?;
        let mut out = Vec::with_capacity(coords.len());
        for i in 0..coords.len() {
            let c = coords.get(i);
            if (c - c.round()).abs() > 1e-6 {
                return None;
            }
            out.push((c.round() as i64).rem_euclid(self.q as i64) as u64);
        }
        Some(out)
    }

    fn min_distance(&self) -> Result<f64, CodecError> {
        let (_, norm) = self.lattice.shortest_vector()?;
        Ok(norm)
    }
}

/// The codec choices the experiment harness can run.
#[derive(Debug, Clone)]
pub enum CodecChoice {
    BlockTri(BlockTriCodec),
    Plain(PlainLatticeCodec),
}

impl LatticeCodec for CodecChoice {
    fn dim(&self) -> usize {
        match self {
            CodecChoice::BlockTri(c) => c.dim(),
            CodecChoice::Plain(c) => c.dim(),
        }
    }

    fn message_len(&self) -> usize {
        match self {
            CodecChoice::BlockTri(c) => c.message_len(),
            CodecChoice::Plain(c) => c.message_len(),
        }
    }

    fn symbol_modulus(&self) -> u64 {
        match self {
            CodecChoice::BlockTri(c) => c.symbol_modulus(),
            CodecChoice::Plain(c) => c.symbol_modulus(),
        }
    }

    fn encode_message(&self, m: &[u64]) -> Result<Vector, CodecError> {
        match self {
            CodecChoice::BlockTri(c) => c.encode_message(m),
            CodecChoice::Plain(c) => c.encode_message(m),
        }
    }

    fn decode_point(&self, y: &Vector) -> Result<Vec<u64>, CodecError> {
        match self {
            CodecChoice::BlockTri(c) => c.decode_point(y),
            CodecChoice::Plain(c) => c.decode_point(y),
        }
    }

    fn generator(&self) -> Result<Matrix, CodecError> {
        match self {
            CodecChoice::BlockTri(c) => c.generator(),
            CodecChoice::Plain(c) => c.generator(),
        }
    }

    fn message_of_point(&self, point: &Vector) -> Option<Vec<u64>> {
        match self {
            CodecChoice::BlockTri(c) => c.message_of_point(point),
            CodecChoice::Plain(c) => c.message_of_point(point),
        }
    }

    fn min_distance(&self) -> Result<f64, CodecError> {
        match self {
            CodecChoice::BlockTri(c) => c.min_distance(),
            CodecChoice::Plain(c) => c.min_distance(),
        }
    }
}
