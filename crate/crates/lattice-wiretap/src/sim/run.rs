//! The Monte Carlo experiment runner: seeded, trial-parallel, and
//! schedule-independent.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::config::{AttackKind, ExperimentConfig, SchemeKind};
use super::report::wilson_interval;
use crate::channel::{sample_channel_pair, transmit, ChannelError, RngStream};
use crate::codec::{CodecChoice, LatticeCodec};
use crate::linalg::{invert, svd, unitarity_deviation, Matrix};
use crate::scheme::{
    codec_second_moment, eve_observe, CodecMoments, InversionScheme, NormMode, SchemeError,
    SvdScheme, ENSEMBLE_SAMPLES,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("codec: {0}")]
    Codec(#[from] crate::codec::CodecError),
    #[error("config: {0}")]
    Config(#[from] super::config::ConfigError),
}

/// Outcome of a single trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub snr: f64,
    pub bob_correct: bool,
    pub eve_correct: BTreeMap<AttackKind, bool>,
    /// Frobenius deviation of g h^{-1} from unitarity.
    pub unitarity_dev: f64,
    /// Off-diagonal mass ratio of the whitened-noise covariance.
    pub cov_offdiag_ratio: f64,
    pub resample_count: u32,
    pub wall_time: Duration,
}

/// One aggregated row of the sweep report.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryPoint {
    pub snr: f64,
    pub party: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackKind>,
    pub errors: u64,
    pub trials: u64,
    pub ser: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub points: Vec<SummaryPoint>,
    pub total_wall_time_s: f64,
    pub total_resamples: u64,
}

#[derive(Debug)]
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

struct TrialContext<'a> {
    config: &'a ExperimentConfig,
    codec: &'a CodecChoice,
    moments: Option<&'a CodecMoments>,
    fixed: Option<&'a (Matrix, Matrix, u32)>,
    /// Codeword-lattice minimum distance; present in codeword noise mode.
    d_min: Option<f64>,
}

// Reserved stream id for the fixed-channel debug mode.
const FIXED_CHANNEL_STREAM: u64 = u64::MAX;

fn svd_threshold(config: &ExperimentConfig, h: &Matrix) -> Result<f64, RunError> {
    match (config.threshold_t, config.threshold_keep) {
        (Some(t), None) => Ok(t),
        (None, Some(k)) => {
            // Midpoint of the spectrum gap below the k-th largest value, so
            // exactly k dimensions clear the threshold.
            let f = svd(h).map_err(SchemeError::from)?;
            let s = f.singular_values.as_slice();
            let t = if k == s.len() { s[k - 1] / 2.0 } else { (s[k - 1] + s[k]) / 2.0 };
            Ok(t)
        }
        _ => unreachable!("validated config has exactly one threshold"),
    }
}

fn run_trial(ctx: &TrialContext<'_>, trial_id: u64, snr: f64) -> Result<TrialRecord, RunError> {
    let started = Instant::now();
    let config = ctx.config;
    let mut rng = RngStream::new(config.seed, trial_id).rng();

    let (h, g, resample_count) = match ctx.fixed {
        Some((h, g, resamples)) => (h.clone(), g.clone(), *resamples),
        None => {
            let s = sample_channel_pair(config.n, config.channel_dist, &mut rng)?;
            let g = if config.g_equals_h { s.h.clone() } else { s.g };
            (s.h, g, s.resample_count)
        }
    };

    // Channel-asymmetry diagnostics; an inversion failure means "nowhere
    // near unitary", reported as infinite deviation.
    let unitarity_dev = match invert(&h) {
        Ok(h_inv) => match g.multiply(&h_inv) {
            Ok(gh) => unitarity_deviation(&gh),
            Err(_) => f64::INFINITY,
        },
        Err(_) => f64::INFINITY,
    };
    let cov_offdiag_ratio = match crate::channel::eve_noise_covariance(&h, &g, 1.0) {
        Ok(cov) => {
            let ratio = crate::channel::offdiag_trace_ratio(&cov);
            // Degenerate covariances must not leak NaN into the CSV.
            if ratio.is_nan() {
                f64::INFINITY
            } else {
                ratio
            }
        }
        Err(_) => f64::INFINITY,
    };

    let message = ctx.codec.random_message(&mut rng);

    enum BuiltScheme {
        Inversion(InversionScheme<CodecChoice>),
        Svd(SvdScheme<CodecChoice>),
    }

    let scheme = match config.scheme {
        SchemeKind::Inversion => BuiltScheme::Inversion(InversionScheme::with_moments(
            ctx.codec.clone(),
            h.clone(),
            config.power,
            config.norm_mode,
            ctx.moments,
        )?),
        SchemeKind::Svd => {
            let t = svd_threshold(config, &h)?;
            BuiltScheme::Svd(SvdScheme::with_moments(
                ctx.codec.clone(),
                h.clone(),
                t,
                config.power,
                config.norm_mode,
                ctx.moments,
            )?)
        }
    };

    let ct = match &scheme {
        BuiltScheme::Inversion(s) => s.encode(&message)?,
        BuiltScheme::Svd(s) => s.encode(&message)?,
    };

    let sigma_b = match config.noise_ref {
        super::config::NoiseRef::Power => (config.power / snr).sqrt(),
        super::config::NoiseRef::Codeword => {
            ct.c * ctx.d_min.expect("codeword mode prices d_min up front") / snr.sqrt()
        }
    };
    let sigma_e = sigma_b * config.sigma_e_ratio;

    let y_b = transmit(&h, &ct.x, sigma_b, &mut rng)?;
    let bob_decoded = match &scheme {
        BuiltScheme::Inversion(s) => s.decode_bob(&y_b, ct.c).ok(),
        BuiltScheme::Svd(s) => s.decode_bob(&y_b, ct.c).ok(),
    };
    let bob_correct = bob_decoded.as_deref() == Some(&message[..]);

    // In the degenerate debug mode Eve shares Bob's observation verbatim.
    let y_e = if config.g_equals_h {
        y_b.clone()
    } else {
        eve_observe(&g, &ct, sigma_e, &mut rng)?
    };
    let eve_c = if config.eve_knows_c { ct.c } else { 1.0 };

    let mut eve_correct = BTreeMap::new();
    for &attack in &config.attacks {
        let decoded: Option<Vec<u64>> = match (&scheme, attack) {
            (BuiltScheme::Inversion(s), AttackKind::Whitened) => {
                s.eve_attack_whitened(&y_e, &g, eve_c).ok().and_then(|o| o.message)
            }
            (BuiltScheme::Inversion(s), AttackKind::Babai) => {
                s.eve_attack_babai(&y_e, &g, eve_c).ok().and_then(|o| o.message)
            }
            (BuiltScheme::Inversion(s), AttackKind::Exhaustive) => {
                s.eve_attack_exhaustive(&y_e, &g, eve_c).ok().and_then(|o| o.message)
            }
            (BuiltScheme::Svd(s), AttackKind::Whitened) => {
                s.eve_attack_whitened(&y_e, &g, eve_c).ok().and_then(|o| o.message)
            }
            (BuiltScheme::Svd(s), AttackKind::Babai | AttackKind::Exhaustive) => {
                s.eve_attack_babai(&y_e, &g, eve_c).ok().and_then(|o| o.message)
            }
        };
        eve_correct.insert(attack, decoded.as_deref() == Some(&message[..]));
    }

    Ok(TrialRecord {
        trial_id,
        snr,
        bob_correct,
        eve_correct,
        unitarity_dev,
        cov_offdiag_ratio,
        resample_count,
        wall_time: started.elapsed(),
    })
}

/// Runs the full sweep. Each trial derives its stream from
/// `(seed, trial_id)`, so results are independent of the thread schedule.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, RunError> {
    config.validate()?;
    let codec = config.build_codec()?;
    let moments = match config.norm_mode {
        NormMode::PerCodeword => None,
        NormMode::EnsembleAverage => Some(codec_second_moment(&codec, ENSEMBLE_SAMPLES)?),
    };
    let fixed = if config.fixed_channel {
        let mut rng = RngStream::new(config.seed, FIXED_CHANNEL_STREAM).rng();
        let s = sample_channel_pair(config.n, config.channel_dist, &mut rng)?;
        let g = if config.g_equals_h { s.h.clone() } else { s.g };
        Some((s.h, g, s.resample_count))
    } else {
        None
    };

    let d_min = match config.noise_ref {
        super::config::NoiseRef::Power => None,
        super::config::NoiseRef::Codeword => Some(codec.min_distance()?),
    };

    let ctx = TrialContext {
        config,
        codec: &codec,
        moments: moments.as_ref(),
        fixed: fixed.as_ref(),
        d_min,
    };

    let trials = config.trials_per_point;
    let jobs: Vec<(u64, f64)> = config
        .snr_grid
        .iter()
        .enumerate()
        .flat_map(|(point_idx, &snr)| {
            (0..trials).map(move |t| (point_idx as u64 * trials + t, snr))
        })
        .collect();

    let mut records = jobs
        .par_iter()
        .map(|&(trial_id, snr)| run_trial(&ctx, trial_id, snr))
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by_key(|r| r.trial_id);

    let summary = summarize(config, &records);
    Ok(RunOutput { records, summary })
}

/// Aggregates records into per-(snr, party/attack) error rates with Wilson
/// intervals.
pub fn summarize(config: &ExperimentConfig, records: &[TrialRecord]) -> Summary {
    let mut points = Vec::new();
    for &snr in &config.snr_grid {
        let at_point: Vec<&TrialRecord> =
            records.iter().filter(|r| r.snr == snr).collect();
        let trials = at_point.len() as u64;
        if trials == 0 {
            continue;
        }
        let bob_errors = at_point.iter().filter(|r| !r.bob_correct).count() as u64;
        let (lo, hi) = wilson_interval(bob_errors, trials);
        points.push(SummaryPoint {
            snr,
            party: "bob".to_string(),
            attack: None,
            errors: bob_errors,
            trials,
            ser: bob_errors as f64 / trials as f64,
            ci_lo: lo,
            ci_hi: hi,
        });
        for &attack in &config.attacks {
            let errors = at_point
                .iter()
                .filter(|r| !r.eve_correct.get(&attack).copied().unwrap_or(false))
                .count() as u64;
            let (lo, hi) = wilson_interval(errors, trials);
            points.push(SummaryPoint {
                snr,
                party: "eve".to_string(),
                attack: Some(attack),
                errors,
                trials,
                ser: errors as f64 / trials as f64,
                ci_lo: lo,
                ci_hi: hi,
            });
        }
    }
    Summary {
        points,
        total_wall_time_s: records.iter().map(|r| r.wall_time.as_secs_f64()).sum(),
        total_resamples: records.iter().map(|r| r.resample_count as u64).sum(),
    }
}
