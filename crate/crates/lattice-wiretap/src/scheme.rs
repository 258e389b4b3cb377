//! The two transmission schemes end-to-end, plus the eavesdropper's attack
//! suite.
//!
//! Channel inversion: Alice sends `x = c H^{-1} lambda`, so Bob observes the
//! clean lattice `c lambda` in white noise. SVD: Alice diagonalizes `h = u d v`,
//! keeps the `k` singular dimensions above a gain threshold, and sends
//! `x = c v^t dtilde^{-1} lambda_tilde` (truncated inverse water-filling).
//! Either way an eavesdropper with an independent channel matrix observes a
//! scrambled general lattice, and whitening it back leaves correlated noise.

use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::channel::{eve_noise_covariance, offdiag_trace_ratio, ChannelError, RngStream};
use crate::codec::{CodecError, LatticeCodec};
use crate::lattice::Lattice;
use crate::linalg::{invert, svd, LinalgError, Matrix, Vector};

/// Messages sampled when estimating the ensemble normalization constant.
pub const ENSEMBLE_SAMPLES: u64 = 10_000;
// Fixed internal stream: the constant must be a deterministic function of
// the channel, power, and public codec so Bob can recompute it without any
// key exchange.
const ENSEMBLE_SEED: RngStream = RngStream { seed: 0x6c61_7474, stream_id: 0 };

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("transmit power must be positive, got {0}")]
    NonPositivePower(f64),
    #[error("normalization constant must be positive, got {0}")]
    NonPositiveC(f64),
    #[error("codec produces zero average power; cannot normalize")]
    ZeroPower,
    #[error("all singular values are at or below the threshold {threshold} (max {max_singular})")]
    AllBelowThreshold { max_singular: f64, threshold: f64 },
    #[error("codec dimension {codec} does not match the scheme's {expected}")]
    CodecDimension { codec: usize, expected: usize },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// How the power normalization constant is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// Exact per-transmission constraint; the constant varies with the
    /// message.
    PerCodeword,
    /// One message-independent constant from the ensemble mean power.
    EnsembleAverage,
}

/// A transmitted signal with its normalization and the underlying lattice
/// point (retained for oracle checks only).
#[derive(Debug, Clone)]
pub struct SchemeCiphertext {
    pub x: Vector,
    pub c: f64,
    pub lambda: Vector,
}

/// Whitened-attack outcome: the decoded message (if the decoder ran) and the
/// off-diagonal mass ratio of the theoretical residual covariance.
#[derive(Debug, Clone)]
pub struct WhitenedAttackOutcome {
    pub message: Option<Vec<u64>>,
    pub residual_cov_offdiag: f64,
}

/// Babai attack outcome: recovered message when the coordinate-to-message
/// map resolves, and the rounding residual distance.
#[derive(Debug, Clone)]
pub struct BabaiAttackOutcome {
    pub message: Option<Vec<u64>>,
    pub dist: f64,
}

/// Second-moment matrix of the codec's lattice points over uniform messages,
/// used to price the ensemble normalization for any channel in O(n^2).
#[derive(Debug, Clone)]
pub struct CodecMoments {
    second_moment: Matrix,
}

/// Estimates `E[lambda lambda^t]` over `samples` uniform messages.
pub fn codec_second_moment<C: LatticeCodec>(
    codec: &C,
    samples: u64,
) -> Result<CodecMoments, SchemeError> {
    let n = codec.dim();
    let mut rng = ENSEMBLE_SEED.rng();
    let mut acc = Matrix::zeros(n, n);
    for _ in 0..samples {
        let m = codec.random_message(&mut rng);
        let lambda = codec.encode_message(&m)?;
        for i in 0..n {
            let li = lambda.get(i);
            if li == 0.0 {
                continue;
            }
            for j in 0..n {
                acc.set(i, j, acc.get(i, j) + li * lambda.get(j));
            }
        }
    }
    Ok(CodecMoments { second_moment: acc.scale(1.0 / samples as f64) })
}

fn ensemble_constant(
    mean_power: f64,
    n: usize,
    power: f64,
) -> Result<f64, SchemeError> {
    if mean_power <= 0.0 {
        return Err(SchemeError::ZeroPower);
    }
    Ok((n as f64 * power / mean_power).sqrt())
}

/// Channel-inversion scheme: `x = c h^{-1} lambda`.
#[derive(Debug, Clone)]
pub struct InversionScheme<C: LatticeCodec> {
    codec: C,
    h: Matrix,
    h_inv: Matrix,
    power: f64,
    norm_mode: NormMode,
    ensemble_c: Option<f64>,
}

impl<C: LatticeCodec> InversionScheme<C> {
    /// Builds the scheme; for the ensemble mode this estimates the codec
    /// moments itself (use [`InversionScheme::with_moments`] inside loops).
    pub fn new(codec: C, h: Matrix, power: f64, norm_mode: NormMode) -> Result<Self, SchemeError> {
        let moments = match norm_mode {
            NormMode::PerCodeword => None,
            NormMode::EnsembleAverage => Some(codec_second_moment(&codec, ENSEMBLE_SAMPLES)?),
        };
        Self::with_moments(codec, h, power, norm_mode, moments.as_ref())
    }

    pub fn with_moments(
        codec: C,
        h: Matrix,
        power: f64,
        norm_mode: NormMode,
        moments: Option<&CodecMoments>,
    ) -> Result<Self, SchemeError> {
        if power <= 0.0 {
            return Err(SchemeError::NonPositivePower(power));
        }
        if codec.dim() != h.rows() {
            return Err(SchemeError::CodecDimension { codec: codec.dim(), expected: h.rows() });
        }
        let h_inv = invert(&h)?;
        let ensemble_c = match norm_mode {
            NormMode::PerCodeword => None,
            NormMode::EnsembleAverage => {
                let m = moments.expect("ensemble mode requires codec moments");
                // mean ||h^{-1} lambda||^2 = <h^{-t} h^{-1}, E[lambda lambda^t]>
                // over the same message sample.
                let q = h_inv.transpose().multiply(&h_inv)?;
                let mean_power: f64 = q
                    .as_slice()
                    .iter()
                    .zip(m.second_moment.as_slice())
                    .map(|(&a, &b)| a * b)
                    .sum();
                Some(ensemble_constant(mean_power, codec.dim(), power)?)
            }
        };
        Ok(Self { codec, h, h_inv, power, norm_mode, ensemble_c })
    }

    pub fn codec(&self) -> &C {
        &self.codec
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn norm_mode(&self) -> NormMode {
        self.norm_mode
    }

    /// The message-independent normalization (ensemble mode only).
    pub fn ensemble_c(&self) -> Option<f64> {
        self.ensemble_c
    }

    /// Maps a message to the transmitted signal `c h^{-1} lambda`.
    pub fn encode(&self, m: &[u64]) -> Result<SchemeCiphertext, SchemeError> {
        let lambda = self.codec.encode_message(m)?;
        let w = self.h_inv.mul_vec(&lambda)?;
        let n = self.dim() as f64;
        let (x, c) = match self.norm_mode {
            NormMode::PerCodeword => {
                let norm = w.norm();
                if norm == 0.0 {
                    (Vector::zeros(self.dim()), 1.0)
                } else {
                    let c = (n * self.power).sqrt() / norm;
                    (w.scale(c), c)
                }
            }
            NormMode::EnsembleAverage => {
                let c = self.ensemble_c.expect("ensemble constant present");
                (w.scale(c), c)
            }
        };
        Ok(SchemeCiphertext { x, c, lambda })
    }

    /// Bob's decoder: rescale by the known constant and run the codec's
    /// structured decoder.
    pub fn decode_bob(&self, y_b: &Vector, c: f64) -> Result<Vec<u64>, SchemeError> {
        if c <= 0.0 {
            return Err(SchemeError::NonPositiveC(c));
        }
        Ok(self.codec.decode_point(&y_b.scale(1.0 / c))?)
    }

    /// Strongest whitening attacker: knows `h`, `g`, `c`, and the codec.
    /// Transforms by `h g^{-1}` and runs Bob's decoder on the result; the
    /// residual noise is correlated with covariance `g^{-t} h^t h g^{-1}`.
    pub fn eve_attack_whitened(
        &self,
        y_e: &Vector,
        g: &Matrix,
        c: f64,
    ) -> Result<WhitenedAttackOutcome, SchemeError> {
        if c <= 0.0 {
            return Err(SchemeError::NonPositiveC(c));
        }
        let g_inv = invert(g)?;
        let transform = self.h.multiply(&g_inv)?;
        let z = transform.mul_vec(y_e)?;
        let message = self.codec.decode_point(&z.scale(1.0 / c)).ok();
        let cov = eve_noise_covariance(&self.h, g, 1.0)?;
        Ok(WhitenedAttackOutcome { message, residual_cov_offdiag: offdiag_trace_ratio(&cov) })
    }

    /// The generator of the lattice Eve observes: `c g h^{-1} B` for the
    /// codec's generator `B`.
    pub fn eve_effective_basis(&self, g: &Matrix, c: f64) -> Result<Matrix, SchemeError> {
        let gen = self.codec.generator()?;
        Ok(g.multiply(&self.h_inv)?.multiply(&gen)?.scale(c))
    }

    /// Generic Babai attack against the scrambled generator. Returns no
    /// message when the effective basis is too ill-conditioned to invert or
    /// the recovered point carries none.
    pub fn eve_attack_babai(
        &self,
        y_e: &Vector,
        g: &Matrix,
        c: f64,
    ) -> Result<BabaiAttackOutcome, SchemeError> {
        let eff = self.eve_effective_basis(g, c)?;
        let Ok(lat) = Lattice::new(eff) else {
            return Ok(BabaiAttackOutcome { message: None, dist: f64::INFINITY });
        };
        let q = lat.babai_round(y_e)?;
        let gen = self.codec.generator()?;
        let clean = Lattice::new(gen)
            .map_err(SchemeError::from)?
            .point_at(&q.coords)
            .map_err(SchemeError::from)?;
        Ok(BabaiAttackOutcome { message: self.codec.message_of_point(&clean), dist: q.dist })
    }

    /// Exhaustive CVP attack, feasible only under the exact-search dimension
    /// cap; demonstrates that small dimensions are insecure.
    pub fn eve_attack_exhaustive(
        &self,
        y_e: &Vector,
        g: &Matrix,
        c: f64,
    ) -> Result<BabaiAttackOutcome, SchemeError> {
        let eff = self.eve_effective_basis(g, c)?;
        let Ok(lat) = Lattice::new(eff) else {
            return Ok(BabaiAttackOutcome { message: None, dist: f64::INFINITY });
        };
        let q = match lat.cvp_exact(y_e, lat.default_search_radius()) {
            Ok(q) => q,
            Err(_) => return Ok(BabaiAttackOutcome { message: None, dist: f64::INFINITY }),
        };
        let gen = self.codec.generator()?;
        let clean = Lattice::new(gen)
            .map_err(SchemeError::from)?
            .point_at(&q.coords)
            .map_err(SchemeError::from)?;
        Ok(BabaiAttackOutcome { message: self.codec.message_of_point(&clean), dist: q.dist })
    }
}

/// Threshold partition of the singular spectrum: `u`, `v`, the `k` gains
/// strictly above the threshold, and `k` itself.
#[derive(Debug, Clone)]
pub struct SvdPartition {
    pub u: Matrix,
    pub v: Matrix,
    pub d1: Vector,
    pub k: usize,
}

/// Factorizes `h = u d v` and keeps the singular values strictly above `t`.
pub fn svd_setup(h: &Matrix, t: f64) -> Result<SvdPartition, SchemeError> {
    let f = svd(h)?;
    let k = f.singular_values.as_slice().iter().filter(|&&s| s > t).count();
    if k == 0 {
        return Err(SchemeError::AllBelowThreshold {
            max_singular: f.singular_values.as_slice().first().copied().unwrap_or(0.0),
            threshold: t,
        });
    }
    let d1 = Vector::from_fn(k, |i| f.singular_values.get(i));
    Ok(SvdPartition { u: f.u, v: f.v, d1, k })
}

/// SVD scheme: communicate a `k`-dimensional lattice point over the strong
/// singular dimensions, zero-padding the rest.
#[derive(Debug, Clone)]
pub struct SvdScheme<C: LatticeCodec> {
    codec: C,
    h: Matrix,
    partition: SvdPartition,
    power: f64,
    norm_mode: NormMode,
    ensemble_c: Option<f64>,
}

impl<C: LatticeCodec> SvdScheme<C> {
    pub fn new(
        codec: C,
        h: Matrix,
        threshold: f64,
        power: f64,
        norm_mode: NormMode,
    ) -> Result<Self, SchemeError> {
        let moments = match norm_mode {
            NormMode::PerCodeword => None,
            NormMode::EnsembleAverage => Some(codec_second_moment(&codec, ENSEMBLE_SAMPLES)?),
        };
        Self::with_moments(codec, h, threshold, power, norm_mode, moments.as_ref())
    }

    pub fn with_moments(
        codec: C,
        h: Matrix,
        threshold: f64,
        power: f64,
        norm_mode: NormMode,
        moments: Option<&CodecMoments>,
    ) -> Result<Self, SchemeError> {
        if power <= 0.0 {
            return Err(SchemeError::NonPositivePower(power));
        }
        let partition = svd_setup(&h, threshold)?;
        if codec.dim() != partition.k {
            return Err(SchemeError::CodecDimension { codec: codec.dim(), expected: partition.k });
        }
        let ensemble_c = match norm_mode {
            NormMode::PerCodeword => None,
            NormMode::EnsembleAverage => {
                let m = moments.expect("ensemble mode requires codec moments");
                // mean ||dtilde^{-1} lambda_tilde||^2 needs only the diagonal
                // second moments of the k-dimensional codec.
                let mean_power: f64 = (0..partition.k)
                    .map(|i| m.second_moment.get(i, i) / (partition.d1.get(i) * partition.d1.get(i)))
                    .sum();
                Some(ensemble_constant(mean_power, h.rows(), power)?)
            }
        };
        Ok(Self { codec, h, partition, power, norm_mode, ensemble_c })
    }

    pub fn codec(&self) -> &C {
        &self.codec
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    pub fn partition(&self) -> &SvdPartition {
        &self.partition
    }

    pub fn k(&self) -> usize {
        self.partition.k
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn ensemble_c(&self) -> Option<f64> {
        self.ensemble_c
    }

    /// Zero-padded, gain-equalized target in the `v` domain:
    /// `dtilde^{-1} lambda_tilde`.
    fn padded_scaled(&self, lambda_k: &Vector) -> Vector {
        let n = self.dim();
        Vector::from_fn(n, |i| {
            if i < self.partition.k {
                lambda_k.get(i) / self.partition.d1.get(i)
            } else {
                0.0
            }
        })
    }

    /// Maps a message to `x = c v^t dtilde^{-1} lambda_tilde`.
    pub fn encode(&self, m: &[u64]) -> Result<SchemeCiphertext, SchemeError> {
        let lambda_k = self.codec.encode_message(m)?;
        let scaled = self.padded_scaled(&lambda_k);
        let n = self.dim();
        let lambda_tilde =
            Vector::from_fn(n, |i| if i < self.partition.k { lambda_k.get(i) } else { 0.0 });
        // v^t is an isometry, so the norm of `scaled` already prices the power.
        let (c, x) = match self.norm_mode {
            NormMode::PerCodeword => {
                let norm = scaled.norm();
                if norm == 0.0 {
                    (1.0, Vector::zeros(n))
                } else {
                    let c = (n as f64 * self.power).sqrt() / norm;
                    (c, self.partition.v.transpose().mul_vec(&scaled.scale(c))?)
                }
            }
            NormMode::EnsembleAverage => {
                let c = self.ensemble_c.expect("ensemble constant present");
                (c, self.partition.v.transpose().mul_vec(&scaled.scale(c))?)
            }
        };
        Ok(SchemeCiphertext { x, c, lambda: lambda_tilde })
    }

    /// Bob's receiver: rotate by `u^t`, keep the first `k` positions, and
    /// decode with the `k`-dimensional codec.
    pub fn decode_bob(&self, y_b: &Vector, c: f64) -> Result<Vec<u64>, SchemeError> {
        if c <= 0.0 {
            return Err(SchemeError::NonPositiveC(c));
        }
        let rotated = self.partition.u.transpose().mul_vec(y_b)?;
        let first_k = Vector::from_fn(self.partition.k, |i| rotated.get(i) / c);
        Ok(self.codec.decode_point(&first_k)?)
    }

    /// Whitening attack for the SVD scheme: transform by `h g^{-1}` and run
    /// Bob's full receive pipeline on the result.
    pub fn eve_attack_whitened(
        &self,
        y_e: &Vector,
        g: &Matrix,
        c: f64,
    ) -> Result<WhitenedAttackOutcome, SchemeError> {
        if c <= 0.0 {
            return Err(SchemeError::NonPositiveC(c));
        }
        let g_inv = invert(g)?;
        let z = self.h.multiply(&g_inv)?.mul_vec(y_e)?;
        let rotated = self.partition.u.transpose().mul_vec(&z)?;
        let first_k = Vector::from_fn(self.partition.k, |i| rotated.get(i) / c);
        let message = self.codec.decode_point(&first_k).ok();
        let cov = eve_noise_covariance(&self.h, g, 1.0)?;
        Ok(WhitenedAttackOutcome { message, residual_cov_offdiag: offdiag_trace_ratio(&cov) })
    }

    /// Effective square generator for the Babai attack: the signal lattice
    /// is k-dimensional, completed with identity columns on the discarded
    /// dimensions (Eve's choice; those dimensions carry only noise).
    pub fn eve_effective_basis(&self, g: &Matrix, c: f64) -> Result<Matrix, SchemeError> {
        let n = self.dim();
        let k = self.partition.k;
        let gen_k = self.codec.generator()?;
        let mut padded = Matrix::identity(n);
        for i in 0..k {
            for j in 0..k {
                padded.set(i, j, gen_k.get(i, j) / self.partition.d1.get(i));
            }
        }
        Ok(g.multiply(&self.partition.v.transpose())?.multiply(&padded)?.scale(c))
    }

    pub fn eve_attack_babai(
        &self,
        y_e: &Vector,
        g: &Matrix,
        c: f64,
    ) -> Result<BabaiAttackOutcome, SchemeError> {
        let eff = self.eve_effective_basis(g, c)?;
        let Ok(lat) = Lattice::new(eff) else {
            return Ok(BabaiAttackOutcome { message: None, dist: f64::INFINITY });
        };
        let q = lat.babai_round(y_e)?;
        let gen_k = self.codec.generator()?;
        let coords_k = &q.coords[..self.partition.k];
        let clean = Lattice::new(gen_k)
            .map_err(SchemeError::from)?
            .point_at(coords_k)
            .map_err(SchemeError::from)?;
        Ok(BabaiAttackOutcome { message: self.codec.message_of_point(&clean), dist: q.dist })
    }
}

/// What the eavesdropper observes: `g x` plus white noise.
pub fn eve_observe(
    g: &Matrix,
    ct: &SchemeCiphertext,
    sigma_e: f64,
    rng: &mut ChaCha12Rng,
) -> Result<Vector, SchemeError> {
    Ok(crate::channel::transmit(g, &ct.x, sigma_e, rng)?)
}
