//! Experiment configuration: a TOML document with strict schema validation
//! (unknown keys rejected, field-level diagnostics).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocktri::BlockTriConfig;
use crate::channel::ChannelDist;
use crate::codec::{BlockTriCodec, CodecChoice, PlainLatticeCodec};
use crate::lattice::{Lattice, DEFAULT_CVP_DIM_CAP};
use crate::linalg::Matrix;
use crate::scheme::NormMode;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("codec construction failed: {0}")]
    Codec(String),
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), reason: reason.into() }
}

/// Which transmission scheme the experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Inversion,
    Svd,
}

/// What the SNR grid is referenced against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseRef {
    /// sigma^2 = power / snr: the grid is transmit SNR per real dimension.
    #[default]
    Power,
    /// sigma = c * d_min / sqrt(snr): the grid is referenced to the scaled
    /// codeword spacing, pinning the decoder's operating point per channel
    /// (snr = 400 puts sigma at 0.05 c d_min).
    Codeword,
}

/// The eavesdropper attacks to evaluate each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Whitened,
    Babai,
    Exhaustive,
}

impl AttackKind {
    pub fn label(&self) -> &'static str {
        match self {
            AttackKind::Whitened => "whitened",
            AttackKind::Babai => "babai",
            AttackKind::Exhaustive => "exhaustive",
        }
    }
}

/// Plain lattice codec parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PlainLatticeConfig {
    pub dim: usize,
    pub q: u64,
    /// Row-major basis entries; identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<f64>>,
}

/// Exactly one codec table must be present.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CodecConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocktri: Option<BlockTriConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plain: Option<PlainLatticeConfig>,
}

fn default_power() -> f64 {
    1.0
}

fn default_sigma_e_ratio() -> f64 {
    1.0
}

fn default_eve_knows_c() -> bool {
    true
}

/// Declarative description of one Monte Carlo experiment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: SchemeKind,
    /// Channel dimension.
    pub n: usize,
    /// Per-dimension average transmit power P.
    #[serde(default = "default_power")]
    pub power: f64,
    /// SNR grid, linear scale; interpretation depends on `noise_ref`
    /// (default: P / sigma^2 per real dimension).
    pub snr_grid: Vec<f64>,
    #[serde(default)]
    pub noise_ref: NoiseRef,
    pub trials_per_point: u64,
    pub channel_dist: ChannelDist,
    /// Fixed gain threshold for the SVD scheme.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_t: Option<f64>,
    /// Alternative to `threshold_t`: keep exactly this many singular
    /// dimensions, thresholding at the midpoint of the spectrum gap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_keep: Option<usize>,
    pub norm_mode: NormMode,
    pub attacks: Vec<AttackKind>,
    pub seed: u64,
    /// Eve's noise std as a multiple of Bob's.
    #[serde(default = "default_sigma_e_ratio")]
    pub sigma_e_ratio: f64,
    /// Debug: force g = h and hand Eve Bob's observation verbatim.
    #[serde(default)]
    pub g_equals_h: bool,
    /// Debug: sample one channel pair for the whole run.
    #[serde(default)]
    pub fixed_channel: bool,
    /// Whether attacks receive the true normalization constant.
    #[serde(default = "default_eve_knows_c")]
    pub eve_knows_c: bool,
    pub codec: CodecConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if self.power <= 0.0 {
            return Err(invalid("power", "must be positive"));
        }
        if self.snr_grid.is_empty() {
            return Err(invalid("snr_grid", "must not be empty"));
        }
        if let Some(&bad) = self.snr_grid.iter().find(|&&s| !(s > 0.0) || !s.is_finite()) {
            return Err(invalid("snr_grid", format!("values must be positive and finite, got {bad}")));
        }
        if self.trials_per_point == 0 {
            return Err(invalid("trials_per_point", "must be at least 1"));
        }
        if self.sigma_e_ratio <= 0.0 {
            return Err(invalid("sigma_e_ratio", "must be positive"));
        }
        let mut sorted_attacks = self.attacks.clone();
        sorted_attacks.sort();
        sorted_attacks.dedup();
        if sorted_attacks.len() != self.attacks.len() {
            return Err(invalid("attacks", "duplicate attack"));
        }
        if self.attacks.contains(&AttackKind::Exhaustive) && self.n > DEFAULT_CVP_DIM_CAP {
            return Err(invalid(
                "attacks",
                format!("exhaustive attack requires n <= {DEFAULT_CVP_DIM_CAP}"),
            ));
        }

        let codec_dim = self.codec_dim()?;
        match self.scheme {
            SchemeKind::Inversion => {
                if self.threshold_t.is_some() || self.threshold_keep.is_some() {
                    return Err(invalid("threshold_t", "only meaningful for scheme = \"svd\""));
                }
                if codec_dim != self.n {
                    return Err(invalid(
                        "codec",
                        format!("dimension {codec_dim} must equal n = {} for inversion", self.n),
                    ));
                }
            }
            SchemeKind::Svd => match (self.threshold_t, self.threshold_keep) {
                (Some(t), None) => {
                    if !(t >= 0.0) || !t.is_finite() {
                        return Err(invalid("threshold_t", "must be finite and nonnegative"));
                    }
                    if codec_dim > self.n {
                        return Err(invalid(
                            "codec",
                            format!("dimension {codec_dim} exceeds n = {}", self.n),
                        ));
                    }
                }
                (None, Some(k)) => {
                    if k == 0 || k > self.n {
                        return Err(invalid("threshold_keep", format!("must be in 1..={}", self.n)));
                    }
                    if codec_dim != k {
                        return Err(invalid(
                            "codec",
                            format!("dimension {codec_dim} must equal threshold_keep = {k}"),
                        ));
                    }
                }
                (Some(_), Some(_)) => {
                    return Err(invalid(
                        "threshold_t",
                        "give either threshold_t or threshold_keep, not both",
                    ));
                }
                (None, None) => {
                    return Err(invalid(
                        "threshold_t",
                        "scheme = \"svd\" needs threshold_t or threshold_keep",
                    ));
                }
            },
        }
        Ok(())
    }

    fn codec_dim(&self) -> Result<usize, ConfigError> {
        match (&self.codec.blocktri, &self.codec.plain) {
            (Some(bt), None) => Ok(bt.l * bt.b),
            (None, Some(pl)) => Ok(pl.dim),
            (Some(_), Some(_)) => {
                Err(invalid("codec", "give exactly one of codec.blocktri / codec.plain"))
            }
            (None, None) => Err(invalid("codec", "missing codec.blocktri or codec.plain")),
        }
    }

    /// Instantiates the configured codec.
    pub fn build_codec(&self) -> Result<CodecChoice, ConfigError> {
        match (&self.codec.blocktri, &self.codec.plain) {
            (Some(bt), None) => {
                let params = bt.build().map_err(|e| ConfigError::Codec(e.to_string()))?;
                Ok(CodecChoice::BlockTri(BlockTriCodec::new(params)))
            }
            (None, Some(pl)) => {
                let basis = match &pl.basis {
                    Some(entries) => Matrix::new(pl.dim, pl.dim, entries.clone())
                        .map_err(|e| ConfigError::Codec(e.to_string()))?,
                    None => Matrix::identity(pl.dim),
                };
                let lattice =
                    Lattice::new(basis).map_err(|e| ConfigError::Codec(e.to_string()))?;
                if pl.q < 2 {
                    return Err(invalid("codec.plain.q", "must be at least 2"));
                }
                Ok(CodecChoice::Plain(PlainLatticeCodec::new(lattice, pl.q)))
            }
            _ => Err(invalid("codec", "give exactly one of codec.blocktri / codec.plain")),
        }
    }
}

/// The frozen default experiment shipped with the crate.
pub fn default_config_toml() -> &'static str {
    include_str!("../../configs/default.toml")
}

pub fn default_config() -> ExperimentConfig {
    ExperimentConfig::from_toml(default_config_toml()).expect("bundled default config is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_parses_and_round_trips() {
        let config = default_config();
        assert_eq!(config.seed, 42);
        let echoed = config.to_toml();
        let back = ExperimentConfig::from_toml(&echoed).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = default_config_toml().to_string();
        text.push_str("\nbogus_key = 1\n");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn zero_trials_rejected() {
        let text = default_config_toml().replace("trials_per_point = 2000", "trials_per_point = 0");
        assert!(text.contains("trials_per_point = 0"), "fixture drifted");
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("trials_per_point"));
    }

    #[test]
    fn svd_requires_threshold() {
        let text = default_config_toml().replace("scheme = \"inversion\"", "scheme = \"svd\"");
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("threshold"));
    }

    #[test]
    fn codec_dimension_must_match() {
        let text = default_config_toml().replace("n = 8", "n = 6");
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("codec"));
    }
}
