#![forbid(unsafe_code)]

//! Lattice-coded physical-layer secrecy over wiretap channels.
//!
//! Alice transmits lattice codewords pre-equalized against the legitimate
//! channel so that Bob sees a structured lattice he can decode in polynomial
//! time, while an eavesdropper on an independent channel faces quantization
//! over a scrambled, general lattice. The crate provides:
//!
//! - [`linalg`]: the dense matrix/vector kernel (LU inversion with a
//!   condition guard, one-sided Jacobi SVD, unitarity diagnostics);
//! - [`lattice`] and [`construction_a`]: general lattices with exact and
//!   Babai quantization, figures of merit, and Construction-A embeddings;
//! - [`blocktri`]: the block-lower-triangular Construction-A codec with
//!   recursive closest-to-origin encoding and an exact sequential decoder;
//! - [`channel`]: seeded sampling of wiretap channel pairs and AWGN;
//! - [`scheme`]: the channel-inversion and SVD (truncated inverse
//!   water-filling) transmission schemes plus the eavesdropper attack suite;
//! - [`sim`]: the reproducible Monte Carlo experiment harness behind the
//!   `lattice-wiretap` CLI.
//!
//! See the `examples/` directory for one runnable walk-through per
//! capability.

pub mod blocktri;
pub mod channel;
pub mod codec;
pub mod construction_a;
pub mod lattice;
pub mod linalg;
pub mod modp;
pub mod scheme;
pub mod sim;

pub use blocktri::{BlockCodeword, BlockMessage, BlockTriConfig, BlockTriParams};
pub use channel::{sample_channel_pair, transmit, ChannelDist, RngStream, WiretapChannel};
pub use codec::{BlockTriCodec, CodecChoice, LatticeCodec, PlainLatticeCodec};
pub use construction_a::ConstructionA;
pub use lattice::{Lattice, MeritReport, QuantizeResult};
pub use linalg::{svd, unitarity_deviation, Matrix, SvdFactorization, Vector};
pub use scheme::{InversionScheme, NormMode, SchemeCiphertext, SvdScheme};
pub use sim::{ExperimentConfig, TrialRecord};
