//! Built-in oracle-equivalence and calibration suites behind the `selftest`
//! CLI subcommand. Each check prints one pass/fail line; the thresholds
//! mirror the acceptance gate.

use rand::Rng;

use crate::blocktri::{BlockMessage, BlockTriParams};
use crate::channel::{random_gaussian_matrix, RngStream};
use crate::codec::{BlockTriCodec, LatticeCodec, PlainLatticeCodec};
use crate::lattice::Lattice;
use crate::linalg::{svd, Matrix, Vector};
use crate::scheme::{svd_setup, InversionScheme, NormMode, SvdScheme};

/// Frozen high-sample oracle value for the hexagonal lattice's normalized
/// second moment (1e7-sample run of `examples/lattice_merit.rs`, seed
/// 20260810).
pub const HEX_NSM_ORACLE: f64 = 0.0801761;
/// Standard error of that oracle run.
pub const HEX_NSM_ORACLE_STDERR: f64 = 1.49e-5;

/// Outcome of one selftest check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn pass(name: &'static str, detail: impl Into<String>) -> Self {
        Self { name, passed: true, detail: detail.into() }
    }

    fn fail(name: &'static str, detail: impl Into<String>) -> Self {
        Self { name, passed: false, detail: detail.into() }
    }
}

/// The frozen block-triangular instance used across tests, with a chosen
/// number of diagonal blocks.
pub fn frozen_blocktri(l: usize) -> BlockTriParams {
    let mut config = super::config::default_config()
        .codec
        .blocktri
        .expect("default config uses the block-triangular codec");
    config.l = l;
    config.a_blocks.retain(|blk| blk.i <= l);
    config.build().expect("frozen instance is valid")
}

/// Runs every check, returning one outcome per line.
pub fn run_selftest() -> Vec<CheckOutcome> {
    vec![
        check_encoder_oracle_equivalence(),
        check_congruence(),
        check_cvp_babai_ordering(),
        check_nsm_calibration(),
        check_zero_noise_round_trips(),
        check_svd_structure(),
        check_power_contract(),
    ]
}

/// Random small instances within the exhaustive-oracle caps.
fn random_small_instance(rng: &mut rand_chacha::ChaCha12Rng) -> (BlockTriParams, BlockMessage) {
    loop {
        let p = [2u64, 3, 5][rng.random_range(0..3usize)];
        let b = rng.random_range(2..=4usize);
        let r = rng.random_range(1..b);
        let z = rng.random_range(0..r);
        let l = rng.random_range(1..=3usize);
        if (p as u128).pow((l * b) as u32) > 600_000 {
            continue;
        }
        let params = BlockTriParams::random(p, l, b, r, z, rng).expect("valid random instance");
        let m = params.random_message(rng);
        return (params, m);
    }
}

pub fn check_encoder_oracle_equivalence() -> CheckOutcome {
    const NAME: &str = "encoder-oracle equivalence";
    let mut rng = RngStream::new(0xacce, 1).rng();
    for case in 0..100 {
        let (params, m) = random_small_instance(&mut rng);
        let fast = match params.encode(&m) {
            Ok(cw) => cw,
            Err(e) => return CheckOutcome::fail(NAME, format!("case {case}: encode failed: {e}")),
        };
        let slow = match params.encode_oracle(&m) {
            Ok(cw) => cw,
            Err(e) => return CheckOutcome::fail(NAME, format!("case {case}: oracle failed: {e}")),
        };
        if fast.x_int != slow.x_int {
            return CheckOutcome::fail(
                NAME,
                format!("case {case}: encode {:?} != oracle {:?}", fast.x_int, slow.x_int),
            );
        }
    }
    CheckOutcome::pass(NAME, "100 randomized instances, identical codewords and tie-breaks")
}

pub fn check_congruence() -> CheckOutcome {
    const NAME: &str = "parity congruence";
    let mut rng = RngStream::new(0xacce, 2).rng();
    for case in 0..100 {
        let (params, m) = random_small_instance(&mut rng);
        let cw = match params.encode(&m) {
            Ok(cw) => cw,
            Err(e) => return CheckOutcome::fail(NAME, format!("case {case}: encode failed: {e}")),
        };
        if !params.satisfies_congruence(&cw.x_int, &m) {
            return CheckOutcome::fail(NAME, format!("case {case}: F x != [0; m] mod p"));
        }
    }
    CheckOutcome::pass(NAME, "F x reproduces the padded syndrome on 100 instances")
}

pub fn check_cvp_babai_ordering() -> CheckOutcome {
    const NAME: &str = "exact CVP vs Babai ordering";
    let mut rng = RngStream::new(0xacce, 3).rng();
    let mut checked = 0;
    for dim in 2..=6usize {
        let mut pairs = 0;
        while pairs < 200 {
            let basis = random_gaussian_matrix(dim, &mut rng);
            let Ok(lat) = Lattice::new(basis) else { continue };
            let target = Vector::from_fn(dim, |_| rng.random_range(-5.0..5.0));
            let babai = lat.babai_round(&target).expect("babai on full-rank basis");
            let exact = match lat.cvp_exact(&target, 2) {
                Ok(q) => q,
                Err(e) => return CheckOutcome::fail(NAME, format!("cvp failed: {e}")),
            };
            if exact.dist > babai.dist + 1e-12 {
                return CheckOutcome::fail(
                    NAME,
                    format!("dim {dim}: exact {} > babai {}", exact.dist, babai.dist),
                );
            }
            pairs += 1;
            checked += 1;
        }
    }
    // Orthogonal basis: the two must agree exactly.
    let z4 = Lattice::standard(4);
    for _ in 0..100 {
        let target = Vector::from_fn(4, |_| rng.random_range(-5.0..5.0));
        let b = z4.babai_round(&target).expect("babai on identity");
        let e = z4.cvp_exact(&target, 2).expect("cvp on identity");
        if b.coords != e.coords {
            return CheckOutcome::fail(NAME, "orthogonal basis disagreement".to_string());
        }
    }
    CheckOutcome::pass(NAME, format!("{checked} random pairs ordered, orthogonal case exact"))
}

pub fn check_nsm_calibration() -> CheckOutcome {
    const NAME: &str = "NSM calibration";
    for dim in 1..=4usize {
        let lat = Lattice::standard(dim);
        let report = match lat.estimate_nsm(100_000, 0xacce + dim as u64) {
            Ok(r) => r,
            Err(e) => return CheckOutcome::fail(NAME, format!("Z^{dim}: {e}")),
        };
        let err = (report.nsm_estimate - 1.0 / 12.0).abs();
        if err > 3.0 * report.nsm_stderr {
            return CheckOutcome::fail(
                NAME,
                format!("Z^{dim}: {} is {}x stderr from 1/12", report.nsm_estimate, err / report.nsm_stderr),
            );
        }
    }
    let hex = Lattice::hexagonal();
    let report = match hex.estimate_nsm(100_000, 0xacce + 9) {
        Ok(r) => r,
        Err(e) => return CheckOutcome::fail(NAME, format!("hexagonal: {e}")),
    };
    let combined = (report.nsm_stderr.powi(2) + HEX_NSM_ORACLE_STDERR.powi(2)).sqrt();
    let err = (report.nsm_estimate - HEX_NSM_ORACLE).abs();
    if err > 3.0 * combined {
        return CheckOutcome::fail(
            NAME,
            format!("hexagonal: {} vs frozen {}", report.nsm_estimate, HEX_NSM_ORACLE),
        );
    }
    CheckOutcome::pass(NAME, "Z^n at 1/12 and hexagonal at the frozen oracle value")
}

pub fn check_zero_noise_round_trips() -> CheckOutcome {
    const NAME: &str = "zero-noise round trips";
    let mut rng = RngStream::new(0xacce, 4).rng();

    // Channel inversion at n = 8 on the frozen codec.
    let codec = BlockTriCodec::new(frozen_blocktri(2));
    let h = random_gaussian_matrix(8, &mut rng);
    let scheme = match InversionScheme::new(codec, h.clone(), 1.0, NormMode::EnsembleAverage) {
        Ok(s) => s,
        Err(e) => return CheckOutcome::fail(NAME, format!("inversion setup: {e}")),
    };
    for case in 0..100 {
        let m = scheme.codec().random_message(&mut rng);
        let ct = scheme.encode(&m).expect("encode");
        let y_b = h.mul_vec(&ct.x).expect("clean channel");
        match scheme.decode_bob(&y_b, ct.c) {
            Ok(decoded) if decoded == m => {}
            other => {
                return CheckOutcome::fail(
                    NAME,
                    format!("inversion case {case}: {other:?} != {m:?}"),
                )
            }
        }
    }

    // SVD scheme at n = 8, threshold at the median singular value (k = 4).
    let h = random_gaussian_matrix(8, &mut rng);
    let f = svd(&h).expect("svd");
    let t = (f.singular_values.get(3) + f.singular_values.get(4)) / 2.0;
    let codec_k = BlockTriCodec::new(frozen_blocktri(1));
    let scheme = match SvdScheme::new(codec_k, h.clone(), t, 1.0, NormMode::EnsembleAverage) {
        Ok(s) => s,
        Err(e) => return CheckOutcome::fail(NAME, format!("svd setup: {e}")),
    };
    for case in 0..100 {
        let m = scheme.codec().random_message(&mut rng);
        let ct = scheme.encode(&m).expect("encode");
        let y_b = h.mul_vec(&ct.x).expect("clean channel");
        match scheme.decode_bob(&y_b, ct.c) {
            Ok(decoded) if decoded == m => {}
            other => {
                return CheckOutcome::fail(NAME, format!("svd case {case}: {other:?} != {m:?}"))
            }
        }
    }
    CheckOutcome::pass(NAME, "inversion and SVD schemes exact on 100 messages each")
}

pub fn check_svd_structure() -> CheckOutcome {
    const NAME: &str = "SVD structural checks";
    // Threshold partition on the (3, 2, 0.5) spectrum with t = 1.
    let partition = match svd_setup(&Matrix::diagonal(&[3.0, 2.0, 0.5]), 1.0) {
        Ok(p) => p,
        Err(e) => return CheckOutcome::fail(NAME, format!("setup failed: {e}")),
    };
    if partition.k != 2 {
        return CheckOutcome::fail(NAME, format!("expected k = 2, got {}", partition.k));
    }

    let mut rng = RngStream::new(0xacce, 5).rng();
    let h = random_gaussian_matrix(6, &mut rng);
    let f = svd(&h).expect("svd");
    let t = (f.singular_values.get(2) + f.singular_values.get(3)) / 2.0;
    let codec = PlainLatticeCodec::new(Lattice::standard(3), 5);
    let scheme = match SvdScheme::new(codec, h.clone(), t, 1.0, NormMode::EnsembleAverage) {
        Ok(s) => s,
        Err(e) => return CheckOutcome::fail(NAME, format!("scheme setup: {e}")),
    };
    for _ in 0..50 {
        let m = scheme.codec().random_message(&mut rng);
        let ct = scheme.encode(&m).expect("encode");
        for i in scheme.k()..6 {
            if ct.lambda.get(i) != 0.0 {
                return CheckOutcome::fail(NAME, "zero padding violated".to_string());
            }
        }
        let recovered = scheme
            .partition()
            .u
            .transpose()
            .multiply(&h)
            .expect("product")
            .mul_vec(&ct.x)
            .expect("product")
            .scale(1.0 / ct.c);
        if recovered.sub(&ct.lambda).norm() > 1e-9 {
            return CheckOutcome::fail(NAME, "pipeline identity u^t h x / c != lambda".to_string());
        }
    }
    CheckOutcome::pass(NAME, "threshold partition, zero padding, and pipeline identity hold")
}

pub fn check_power_contract() -> CheckOutcome {
    const NAME: &str = "power contract";
    let mut rng = RngStream::new(0xacce, 6).rng();
    let h = random_gaussian_matrix(8, &mut rng);
    let power = 1.0;

    let per = InversionScheme::new(
        BlockTriCodec::new(frozen_blocktri(2)),
        h.clone(),
        power,
        NormMode::PerCodeword,
    )
    .expect("per-codeword scheme");
    for _ in 0..1000 {
        let m = per.codec().random_message(&mut rng);
        let ct = per.encode(&m).expect("encode");
        if ct.x.norm_sq() / 8.0 > power * (1.0 + 1e-9) {
            return CheckOutcome::fail(NAME, "per-codeword power exceeded".to_string());
        }
    }

    let ens = InversionScheme::new(
        BlockTriCodec::new(frozen_blocktri(2)),
        h,
        power,
        NormMode::EnsembleAverage,
    )
    .expect("ensemble scheme");
    let trials = 10_000;
    let mut total = 0.0;
    for _ in 0..trials {
        let m = ens.codec().random_message(&mut rng);
        total += ens.encode(&m).expect("encode").x.norm_sq() / 8.0;
    }
    let mean = total / trials as f64;
    if (mean - power).abs() > 0.05 * power {
        return CheckOutcome::fail(NAME, format!("ensemble mean power {mean} vs target {power}"));
    }
    CheckOutcome::pass(NAME, format!("per-codeword bound exact, ensemble mean {mean:.4}"))
}
