//! Wiretap system model: seeded sampling of the legitimate/eavesdropper
//! channel matrices, AWGN transmission, and the eavesdropper's whitened noise
//! covariance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{condition_estimate, invert, LinalgError, Matrix, Vector};

/// Channel matrices are resampled when the condition estimate exceeds this.
pub const CONDITION_RESAMPLE_THRESHOLD: f64 = 1e8;
/// How many times `sample_channel_pair` retries before giving up.
pub const MAX_RESAMPLES: u32 = 100;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("could not sample a well-conditioned channel after {0} resamples")]
    ConditioningFailure(u32),
    #[error("noise standard deviation must be nonnegative, got {0}")]
    NegativeSigma(f64),
    #[error("channel dimension must be at least 1")]
    EmptyChannel,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Identifies one reproducible random stream: identical `(seed, stream_id)`
/// pairs replay identical draws, distinct stream ids are independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Instantiates the generator for this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Entry distribution for sampled channel matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelDist {
    /// i.i.d. standard normal entries.
    Gaussian,
    /// i.i.d. uniform entries on (-1, 1).
    Uniform,
}

/// The wiretap pair: Bob sees `y_b = h x + n_b`, Eve sees `y_e = g x + n_e`.
#[derive(Debug, Clone)]
pub struct WiretapChannel {
    pub h: Matrix,
    pub g: Matrix,
    pub sigma_b: f64,
    pub sigma_e: f64,
}

impl WiretapChannel {
    pub fn new(h: Matrix, g: Matrix, sigma_b: f64, sigma_e: f64) -> Result<Self, ChannelError> {
        if h.rows() != g.rows() || h.cols() != g.cols() {
            return Err(LinalgError::DimensionMismatch(format!(
                "h is {}x{}, g is {}x{}",
                h.rows(),
                h.cols(),
                g.rows(),
                g.cols()
            ))
            .into());
        }
        if sigma_b <= 0.0 {
            return Err(ChannelError::NegativeSigma(sigma_b));
        }
        if sigma_e <= 0.0 {
            return Err(ChannelError::NegativeSigma(sigma_e));
        }
        Ok(Self { h, g, sigma_b, sigma_e })
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }
}

/// A sampled channel pair plus how many conditioning resamples it took.
#[derive(Debug, Clone)]
pub struct SampledChannel {
    pub h: Matrix,
    pub g: Matrix,
    pub resample_count: u32,
}

pub fn random_gaussian_matrix(n: usize, rng: &mut ChaCha12Rng) -> Matrix {
    let data: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(rng)).collect();
    Matrix::new(n, n, data).expect("finite samples")
}

fn random_uniform_matrix(n: usize, rng: &mut ChaCha12Rng) -> Matrix {
    let data: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    Matrix::new(n, n, data).expect("finite samples")
}

/// Random orthogonal matrix via Gram-Schmidt of a Gaussian draw. Test and
/// calibration helper.
pub fn random_orthogonal_matrix(n: usize, rng: &mut ChaCha12Rng) -> Matrix {
    loop {
        let raw = random_gaussian_matrix(n, rng);
        let mut cols: Vec<Vector> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut c = raw.column(j);
            for prev in &cols {
                let proj = c.dot(prev);
                c = c.sub(&prev.scale(proj));
            }
            let norm = c.norm();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols.push(c.scale(1.0 / norm));
        }
        if ok {
            let mut q = Matrix::zeros(n, n);
            for (j, c) in cols.iter().enumerate() {
                for i in 0..n {
                    q.set(i, j, c.get(i));
                }
            }
            return q;
        }
    }
}

fn draw_matrix(n: usize, dist: ChannelDist, rng: &mut ChaCha12Rng) -> Matrix {
    match dist {
        ChannelDist::Gaussian => random_gaussian_matrix(n, rng),
        ChannelDist::Uniform => random_uniform_matrix(n, rng),
    }
}

/// Draws independent `h` and `g` with i.i.d. entries, resampling `h` while
/// its condition estimate exceeds [`CONDITION_RESAMPLE_THRESHOLD`]. Noise
/// levels are chosen by the caller afterwards.
pub fn sample_channel_pair(
    n: usize,
    dist: ChannelDist,
    rng: &mut ChaCha12Rng,
) -> Result<SampledChannel, ChannelError> {
    if n == 0 {
        return Err(ChannelError::EmptyChannel);
    }
    let mut resample_count = 0;
    let h = loop {
        let cand = draw_matrix(n, dist, rng);
        if condition_estimate(&cand)? <= CONDITION_RESAMPLE_THRESHOLD {
            break cand;
        }
        resample_count += 1;
        if resample_count > MAX_RESAMPLES {
            return Err(ChannelError::ConditioningFailure(MAX_RESAMPLES));
        }
    };
    let g = draw_matrix(n, dist, rng);
    Ok(SampledChannel { h, g, resample_count })
}

/// Sends `x` through the linear channel `m` with white Gaussian noise of the
/// given per-component standard deviation.
pub fn transmit(
    m: &Matrix,
    x: &Vector,
    sigma: f64,
    rng: &mut ChaCha12Rng,
) -> Result<Vector, ChannelError> {
    if sigma < 0.0 {
        return Err(ChannelError::NegativeSigma(sigma));
    }
    let clean = m.mul_vec(x)?;
    if sigma == 0.0 {
        return Ok(clean);
    }
    let noisy: Vec<f64> = clean
        .as_slice()
        .iter()
        .map(|&c| {
            let draw: f64 = StandardNormal.sample(rng);
            c + sigma * draw
        })
        .collect();
    Ok(Vector::new(noisy)?)
}

/// Covariance of the eavesdropper's residual noise `h g^{-1} n_e` after the
/// whitening transform: `sigma_e^2 g^{-t} h^t h g^{-1}`, symmetrized.
pub fn eve_noise_covariance(h: &Matrix, g: &Matrix, sigma_e: f64) -> Result<Matrix, ChannelError> {
    let g_inv = invert(g)?;
    let hg = h.multiply(&g_inv)?;
    let cov = hg.transpose().multiply(&hg)?.scale(sigma_e * sigma_e);
    // Symmetrize to scrub the last-bit asymmetry from the two products.
    Ok(cov.add(&cov.transpose())?.scale(0.5))
}

/// Frobenius mass of the off-diagonal entries relative to the trace; the
/// whiteness diagnostic used to demonstrate the eavesdropper's disadvantage.
pub fn offdiag_trace_ratio(c: &Matrix) -> f64 {
    assert!(c.is_square(), "offdiag_trace_ratio expects a square matrix");
    let n = c.rows();
    let mut off = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off += c.get(i, j) * c.get(i, j);
            }
        }
    }
    off.sqrt() / c.trace()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_streams_reproduce_identical_channels() {
        let a = sample_channel_pair(6, ChannelDist::Gaussian, &mut RngStream::new(9, 3).rng()).unwrap();
        let b = sample_channel_pair(6, ChannelDist::Gaussian, &mut RngStream::new(9, 3).rng()).unwrap();
        assert_eq!(a.h, b.h);
        assert_eq!(a.g, b.g);
        assert_eq!(a.resample_count, b.resample_count);
    }

    #[test]
    fn h_and_g_are_distinct() {
        for t in 0..1000 {
            let s = sample_channel_pair(16, ChannelDist::Gaussian, &mut RngStream::new(21, t).rng())
                .unwrap();
            assert!(s.h.sub(&s.g).unwrap().frobenius_norm() > 0.0);
        }
    }

    #[test]
    fn gaussian_entry_variance_near_one() {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        let mut t = 0;
        while count < 100_000 {
            let s = sample_channel_pair(16, ChannelDist::Gaussian, &mut RngStream::new(33, t).rng())
                .unwrap();
            for &x in s.h.as_slice() {
                sum += x;
                sum_sq += x * x;
                count += 1;
            }
            t += 1;
        }
        let mean = sum / count as f64;
        let var = sum_sq / count as f64 - mean * mean;
        assert!((var - 1.0).abs() < 0.02, "empirical variance {var}");
    }

    #[test]
    fn transmit_noiseless_is_exact_product() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let x = Vector::from_slice(&[1.0, -1.0]);
        let y = transmit(&m, &x, 0.0, &mut RngStream::new(1, 0).rng()).unwrap();
        assert_eq!(y.as_slice(), &[-1.0, -1.0]);
    }

    #[test]
    fn transmit_noise_statistics() {
        // Pure noise through the identity: per-component variance within 3%
        // of sigma^2 and cross-correlation below 0.02 at 1e5 draws.
        let n = 2;
        let sigma = 0.7;
        let m = Matrix::identity(n);
        let x = Vector::zeros(n);
        let mut rng = RngStream::new(100, 0).rng();
        let draws = 100_000;
        let mut sums = [0.0f64; 2];
        let mut sq = [0.0f64; 2];
        let mut cross = 0.0f64;
        for _ in 0..draws {
            let y = transmit(&m, &x, sigma, &mut rng).unwrap();
            for i in 0..n {
                sums[i] += y.get(i);
                sq[i] += y.get(i) * y.get(i);
            }
            cross += y.get(0) * y.get(1);
        }
        let nf = draws as f64;
        let mut vars = [0.0f64; 2];
        for i in 0..n {
            let mean = sums[i] / nf;
            vars[i] = sq[i] / nf - mean * mean;
            assert!((vars[i] - sigma * sigma).abs() < 0.03 * sigma * sigma);
        }
        let cov = cross / nf - (sums[0] / nf) * (sums[1] / nf);
        let corr = cov / (vars[0] * vars[1]).sqrt();
        assert!(corr.abs() < 0.02, "cross-correlation {corr}");
    }

    #[test]
    fn transmit_is_linear_at_zero_noise() {
        let mut rng = RngStream::new(8, 0).rng();
        let m = random_gaussian_matrix(4, &mut rng);
        let x1 = Vector::from_slice(&[0.5, -1.0, 2.0, 0.25]);
        let x2 = Vector::from_slice(&[1.5, 0.5, -0.5, 1.0]);
        let mut r = RngStream::new(0, 0).rng();
        let lhs = transmit(&m, &x1.add(&x2), 0.0, &mut r).unwrap();
        let rhs = transmit(&m, &x1, 0.0, &mut r)
            .unwrap()
            .add(&transmit(&m, &x2, 0.0, &mut r).unwrap());
        assert!(lhs.sub(&rhs).norm() < 1e-12);
    }

    #[test]
    fn eve_covariance_degenerate_cases() {
        let mut rng = RngStream::new(13, 0).rng();
        let h = random_gaussian_matrix(4, &mut rng);
        let sigma_e = 0.3;

        // g == h collapses to sigma^2 I.
        let cov = eve_noise_covariance(&h, &h, sigma_e).unwrap();
        let target = Matrix::identity(4).scale(sigma_e * sigma_e);
        assert!(cov.sub(&target).unwrap().frobenius_norm() < 1e-9);

        // g == 2h scales the covariance by 1/4.
        let cov2 = eve_noise_covariance(&h, &h.scale(2.0), sigma_e).unwrap();
        let target2 = Matrix::identity(4).scale(sigma_e * sigma_e / 4.0);
        assert!(cov2.sub(&target2).unwrap().frobenius_norm() < 1e-9);
    }

    #[test]
    fn eve_covariance_is_symmetric_psd() {
        for t in 0..50 {
            let mut rng = RngStream::new(77, t).rng();
            let h = random_gaussian_matrix(6, &mut rng);
            let g = random_gaussian_matrix(6, &mut rng);
            let Ok(cov) = eve_noise_covariance(&h, &g, 1.0) else { continue };
            assert!(cov.sub(&cov.transpose()).unwrap().frobenius_norm() < 1e-9);
            // PSD check: x^t C x >= -tolerance for a bundle of random x.
            for k in 0..20 {
                let x = Vector::from_fn(6, |i| ((i as f64 + 1.3) * (k as f64 + 0.7)).sin());
                let q = cov.mul_vec(&x).unwrap().dot(&x);
                assert!(q >= -1e-9 * cov.trace(), "negative quadratic form {q}");
            }
        }
    }

    #[test]
    fn eve_covariance_is_far_from_diagonal_for_independent_channels() {
        let mut strong = 0usize;
        let total = 1000usize;
        for t in 0..total {
            let mut rng = RngStream::new(555, t as u64).rng();
            let h = random_gaussian_matrix(8, &mut rng);
            let g = random_gaussian_matrix(8, &mut rng);
            let Ok(cov) = eve_noise_covariance(&h, &g, 1.0) else { continue };
            if offdiag_trace_ratio(&cov) > 0.05 {
                strong += 1;
            }
        }
        assert!(strong >= total * 95 / 100, "only {strong}/{total} strongly correlated");
    }
}
