//! The asymmetry gate: per SNR point, Bob's error rate must sit far below
//! the best eavesdropper attack, and the sampled channels must actually be
//! asymmetric. Exit-code material for CI.

use thiserror::Error;

use super::config::AttackKind;
use super::report::wilson_interval;
use super::run::TrialRecord;

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error("no records to validate")]
    Empty,
    #[error("records carry no eavesdropper attack outcomes")]
    NoAttacks,
    #[error("insufficient trials at snr {snr}: {detail}")]
    InsufficientTrials { snr: f64, detail: String },
}

/// Pass thresholds; defaults mirror the acceptance gate.
#[derive(Debug, Clone, Copy)]
pub struct AsymmetryThresholds {
    /// Eve's best-attack SER must be at least this multiple of Bob's.
    pub min_ser_ratio: f64,
    /// Fraction of channels that must pass both asymmetry proxies.
    pub min_proxy_fraction: f64,
    /// Proxy: unitarity deviation of g h^{-1} must exceed this.
    pub unitarity_threshold: f64,
    /// Proxy: covariance off-diagonal mass ratio must exceed this.
    pub offdiag_threshold: f64,
}

impl Default for AsymmetryThresholds {
    fn default() -> Self {
        Self {
            min_ser_ratio: 50.0,
            min_proxy_fraction: 0.95,
            unitarity_threshold: 0.1,
            offdiag_threshold: 0.05,
        }
    }
}

/// Verdict for one SNR point.
#[derive(Debug, Clone)]
pub struct PointVerdict {
    pub snr: f64,
    pub trials: u64,
    pub bob_ser: f64,
    /// Best (lowest-SER) attack and its SER.
    pub best_attack: AttackKind,
    pub best_eve_ser: f64,
    /// `None` encodes the infinite-ratio sentinel (Bob made no errors).
    pub ratio: Option<f64>,
    pub proxy_fraction: f64,
    pub passed: bool,
    pub diagnostic: String,
}

/// Checks every SNR point in the records against the thresholds.
pub fn validate_asymmetry(
    records: &[TrialRecord],
    thresholds: &AsymmetryThresholds,
) -> Result<Vec<PointVerdict>, ValidateError> {
    if records.is_empty() {
        return Err(ValidateError::Empty);
    }
    if records.iter().all(|r| r.eve_correct.is_empty()) {
        return Err(ValidateError::NoAttacks);
    }
    let mut snrs: Vec<f64> = records.iter().map(|r| r.snr).collect();
    snrs.sort_by(|a, b| a.partial_cmp(b).expect("finite snr"));
    snrs.dedup();

    let mut verdicts = Vec::new();
    for snr in snrs {
        let at_point: Vec<&TrialRecord> = records.iter().filter(|r| r.snr == snr).collect();
        let trials = at_point.len() as u64;
        let bob_errors = at_point.iter().filter(|r| !r.bob_correct).count() as u64;
        let bob_ser = bob_errors as f64 / trials as f64;
        let (bob_lo, bob_hi) = wilson_interval(bob_errors, trials);
        let _ = bob_lo;

        let mut attacks: Vec<AttackKind> =
            at_point.iter().flat_map(|r| r.eve_correct.keys().copied()).collect();
        attacks.sort();
        attacks.dedup();
        if attacks.is_empty() {
            return Err(ValidateError::NoAttacks);
        }
        // The strongest attack is the one with the fewest errors.
        let (best_attack, eve_errors) = attacks
            .iter()
            .map(|&a| {
                let errs = at_point
                    .iter()
                    .filter(|r| !r.eve_correct.get(&a).copied().unwrap_or(false))
                    .count() as u64;
                (a, errs)
            })
            .min_by_key(|&(_, e)| e)
            .expect("at least one attack");
        let best_eve_ser = eve_errors as f64 / trials as f64;
        let (eve_lo, eve_hi) = wilson_interval(eve_errors, trials);

        let proxy_hits = at_point
            .iter()
            .filter(|r| {
                r.unitarity_dev > thresholds.unitarity_threshold
                    && r.cov_offdiag_ratio > thresholds.offdiag_threshold
            })
            .count();
        let proxy_fraction = proxy_hits as f64 / trials as f64;

        let (ratio, ratio_pass) = if bob_errors == 0 {
            (None, true)
        } else {
            let ratio = best_eve_ser / bob_ser;
            // Undecidable when the intervals are wider than the gap to the
            // pass boundary.
            let gap = (best_eve_ser - thresholds.min_ser_ratio * bob_ser).abs();
            let width = (eve_hi - eve_lo) + thresholds.min_ser_ratio * (bob_hi - bob_lo);
            if width > gap {
                return Err(ValidateError::InsufficientTrials {
                    snr,
                    detail: format!(
                        "interval width {width:.4} exceeds the decision gap {gap:.4} \
                         (bob ser {bob_ser:.4}, best eve ser {best_eve_ser:.4})"
                    ),
                });
            }
            (Some(ratio), ratio >= thresholds.min_ser_ratio)
        };
        let proxy_pass = proxy_fraction >= thresholds.min_proxy_fraction;

        let diagnostic = if ratio_pass && proxy_pass {
            "ok".to_string()
        } else if !ratio_pass {
            format!(
                "no asymmetry: best eve ser {best_eve_ser:.4} is below {}x bob ser {bob_ser:.4}",
                thresholds.min_ser_ratio
            )
        } else {
            format!(
                "channel asymmetry proxy below threshold: {proxy_fraction:.3} < {}",
                thresholds.min_proxy_fraction
            )
        };

        verdicts.push(PointVerdict {
            snr,
            trials,
            bob_ser,
            best_attack,
            best_eve_ser,
            ratio,
            proxy_fraction,
            passed: ratio_pass && proxy_pass,
            diagnostic,
        });
    }
    Ok(verdicts)
}
