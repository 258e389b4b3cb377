//! Acceptance gate: every release criterion, one test each, with the
//! tolerances pinned in code. Run with `--nocapture` to see the per-criterion
//! pass lines:
//!
//! ```text
//! cargo test -p lattice-wiretap --test acceptance -- --nocapture
//! ```

use std::sync::OnceLock;

use rand::Rng;

use lattice_wiretap::blocktri::BlockTriParams;
use lattice_wiretap::channel::{random_gaussian_matrix, RngStream};
use lattice_wiretap::codec::{BlockTriCodec, LatticeCodec};
use lattice_wiretap::lattice::Lattice;
use lattice_wiretap::linalg::{svd, Matrix, Vector};
use lattice_wiretap::scheme::{svd_setup, InversionScheme, NormMode, SvdScheme};
use lattice_wiretap::sim::selftest::{frozen_blocktri, HEX_NSM_ORACLE, HEX_NSM_ORACLE_STDERR};
use lattice_wiretap::sim::{self, default_config, report, AttackKind};

fn passed(criterion: &str, detail: impl AsRef<str>) {
    println!("acceptance: {criterion} PASS - {}", detail.as_ref());
}

/// Random codec instances inside the exhaustive-oracle budget.
fn random_small_instance(
    rng: &mut rand_chacha::ChaCha12Rng,
) -> (BlockTriParams, lattice_wiretap::blocktri::BlockMessage) {
    loop {
        let p = [2u64, 3, 5][rng.random_range(0..3usize)];
        let b = rng.random_range(2..=4usize);
        let r = rng.random_range(1..b);
        let z = rng.random_range(0..r);
        let l = rng.random_range(1..=3usize);
        if (p as u128).pow((l * b) as u32) > 600_000 {
            continue;
        }
        let params = BlockTriParams::random(p, l, b, r, z, rng).expect("valid instance");
        let m = params.random_message(rng);
        return (params, m);
    }
}

#[test]
fn criterion_01_encoder_oracle_equivalence() {
    let mut rng = RngStream::new(0xc1, 0).rng();
    for case in 0..100 {
        let (params, m) = random_small_instance(&mut rng);
        let fast = params.encode(&m).expect("encode");
        let slow = params.encode_oracle(&m).expect("oracle");
        assert_eq!(
            fast.x_int, slow.x_int,
            "case {case}: recursive encoder disagrees with the exhaustive oracle"
        );
    }
    passed("criterion 1 (encoder-oracle equivalence)", "100 instances, exact integer equality");
}

#[test]
fn criterion_02_congruence_invariant() {
    let mut rng = RngStream::new(0xc1, 0).rng(); // same instances as criterion 1
    for case in 0..100 {
        let (params, m) = random_small_instance(&mut rng);
        let cw = params.encode(&m).expect("encode");
        assert!(
            params.satisfies_congruence(&cw.x_int, &m),
            "case {case}: F x != [0; m] (mod p)"
        );
    }
    passed("criterion 2 (congruence invariant)", "exact integer syndrome on all 100 encodes");
}

#[test]
fn criterion_03_cvp_oracle_ordering() {
    let mut rng = RngStream::new(0xc3, 0).rng();
    let mut pairs = 0;
    for dim in 2..=6usize {
        let mut done = 0;
        while done < 200 {
            let Ok(lat) = Lattice::new(random_gaussian_matrix(dim, &mut rng)) else { continue };
            let target = Vector::from_fn(dim, |_| rng.random_range(-5.0..5.0));
            let babai = lat.babai_round(&target).expect("babai");
            let exact = lat.cvp_exact(&target, 2).expect("search");
            assert!(
                exact.dist <= babai.dist,
                "dim {dim}: exact {} exceeded babai {}",
                exact.dist,
                babai.dist
            );
            done += 1;
            pairs += 1;
        }
    }
    // Orthogonal bases: exact equality of the chosen points.
    let z3 = Lattice::standard(3);
    for _ in 0..200 {
        let target = Vector::from_fn(3, |_| rng.random_range(-9.0..9.0));
        assert_eq!(
            z3.cvp_exact(&target, 2).expect("search").coords,
            z3.babai_round(&target).expect("babai").coords
        );
    }
    passed("criterion 3 (CVP ordering)", format!("{pairs} random pairs plus orthogonal equality"));
}

#[test]
fn criterion_04_nsm_calibration() {
    for dim in 1..=4usize {
        let report = Lattice::standard(dim).estimate_nsm(100_000, 0xc4 + dim as u64).expect("nsm");
        let err = (report.nsm_estimate - 1.0 / 12.0).abs();
        assert!(
            err <= 3.0 * report.nsm_stderr,
            "Z^{dim} estimate {} is {:.1} stderr from 1/12",
            report.nsm_estimate,
            err / report.nsm_stderr
        );
    }
    let hex = Lattice::hexagonal().estimate_nsm(100_000, 0xc4).expect("nsm");
    let combined = (hex.nsm_stderr.powi(2) + HEX_NSM_ORACLE_STDERR.powi(2)).sqrt();
    let err = (hex.nsm_estimate - HEX_NSM_ORACLE).abs();
    assert!(
        err <= 3.0 * combined,
        "hexagonal estimate {} vs frozen oracle {HEX_NSM_ORACLE}",
        hex.nsm_estimate
    );
    passed(
        "criterion 4 (NSM calibration)",
        format!("Z^1..Z^4 at 1/12, hexagonal {:.6} vs frozen {HEX_NSM_ORACLE}", hex.nsm_estimate),
    );
}

#[test]
fn criterion_05_zero_noise_round_trips() {
    let mut rng = RngStream::new(0xc5, 0).rng();

    let h = random_gaussian_matrix(8, &mut rng);
    let inversion = InversionScheme::new(
        BlockTriCodec::new(frozen_blocktri(2)),
        h.clone(),
        1.0,
        NormMode::EnsembleAverage,
    )
    .expect("scheme");
    for _ in 0..100 {
        let m = inversion.codec().random_message(&mut rng);
        let ct = inversion.encode(&m).expect("encode");
        let y_b = h.mul_vec(&ct.x).expect("noiseless link");
        assert_eq!(inversion.decode_bob(&y_b, ct.c).expect("decode"), m);
    }

    let h = random_gaussian_matrix(8, &mut rng);
    let f = svd(&h).expect("svd");
    let t = (f.singular_values.get(3) + f.singular_values.get(4)) / 2.0; // median, k = 4
    let svd_scheme = SvdScheme::new(
        BlockTriCodec::new(frozen_blocktri(1)),
        h.clone(),
        t,
        1.0,
        NormMode::EnsembleAverage,
    )
    .expect("scheme");
    assert_eq!(svd_scheme.k(), 4);
    for _ in 0..100 {
        let m = svd_scheme.codec().random_message(&mut rng);
        let ct = svd_scheme.encode(&m).expect("encode");
        let y_b = h.mul_vec(&ct.x).expect("noiseless link");
        assert_eq!(svd_scheme.decode_bob(&y_b, ct.c).expect("decode"), m);
    }
    passed("criterion 5 (zero-noise round trips)", "inversion and SVD exact on 100 messages each");
}

/// Criteria 6 and 7 share one 1e4-trial run at the frozen operating point
/// (sigma = 0.05 c d_min, i.e. snr 400 in codeword reference).
fn operating_point_run() -> &'static sim::RunOutput {
    static RUN: OnceLock<sim::RunOutput> = OnceLock::new();
    RUN.get_or_init(|| {
        let mut config = default_config();
        config.snr_grid = vec![400.0];
        config.trials_per_point = 10_000;
        sim::run(&config).expect("operating-point run")
    })
}

#[test]
fn criterion_06_bob_operating_point() {
    // The frozen codec's minimum distance backs the noise calibration.
    let d_min = frozen_blocktri(2).min_distance_estimate().expect("within caps");
    assert!(
        (d_min - 2.0_f64.sqrt() / 5.0).abs() < 1e-12,
        "frozen codec min distance drifted: {d_min}"
    );

    let output = operating_point_run();
    let bob = output
        .summary
        .points
        .iter()
        .find(|p| p.party == "bob")
        .expect("bob summary row");
    assert_eq!(bob.trials, 10_000);
    assert!(
        bob.ser <= 1e-2,
        "bob block-error rate {} exceeds 1e-2 at the operating point",
        bob.ser
    );
    passed(
        "criterion 6 (bob operating point)",
        format!("ser {} over {} trials at sigma = 0.05 c d_min, d_min = {d_min:.6}", bob.ser, bob.trials),
    );
}

#[test]
fn criterion_07_eavesdropper_disadvantage() {
    let output = operating_point_run();
    let bob = output.summary.points.iter().find(|p| p.party == "bob").expect("bob row");
    let eve = output
        .summary
        .points
        .iter()
        .find(|p| p.party == "eve" && p.attack == Some(AttackKind::Whitened))
        .expect("whitened attack row");

    assert!(
        eve.ser >= 50.0 * bob.ser,
        "eve whitened ser {} is not 50x bob ser {}",
        eve.ser,
        bob.ser
    );

    let proxy_hits = output
        .records
        .iter()
        .filter(|r| r.unitarity_dev > 0.1 && r.cov_offdiag_ratio > 0.05)
        .count();
    let fraction = proxy_hits as f64 / output.records.len() as f64;
    assert!(
        fraction >= 0.95,
        "only {:.1}% of channel pairs pass the asymmetry proxies",
        100.0 * fraction
    );
    passed(
        "criterion 7 (eavesdropper disadvantage)",
        format!(
            "eve whitened ser {} vs bob {} ({} trials), proxy fraction {:.3}",
            eve.ser, bob.ser, eve.trials, fraction
        ),
    );
}

#[test]
fn criterion_08_svd_structural_checks() {
    // Threshold partition on the (3, 2, 0.5) spectrum at t = 1.
    let partition = svd_setup(&Matrix::diagonal(&[3.0, 2.0, 0.5]), 1.0).expect("setup");
    assert_eq!(partition.k, 2);
    assert!((partition.d1.get(0) - 3.0).abs() < 1e-9);
    assert!((partition.d1.get(1) - 2.0).abs() < 1e-9);

    let mut rng = RngStream::new(0xc8, 0).rng();
    let h = random_gaussian_matrix(8, &mut rng);
    let f = svd(&h).expect("svd");
    let t = (f.singular_values.get(3) + f.singular_values.get(4)) / 2.0;
    let scheme = SvdScheme::new(
        BlockTriCodec::new(frozen_blocktri(1)),
        h.clone(),
        t,
        1.0,
        NormMode::EnsembleAverage,
    )
    .expect("scheme");
    let k = scheme.k();
    for _ in 0..100 {
        let m = scheme.codec().random_message(&mut rng);
        let ct = scheme.encode(&m).expect("encode");
        // Discarded components are exactly zero for every message.
        for i in k..8 {
            assert_eq!(ct.lambda.get(i), 0.0);
        }
        // Pipeline identity u^t h x / c = lambda within 1e-9.
        let recovered = scheme
            .partition()
            .u
            .transpose()
            .multiply(&h)
            .expect("product")
            .mul_vec(&ct.x)
            .expect("product")
            .scale(1.0 / ct.c);
        let err = recovered.sub(&ct.lambda).norm();
        assert!(err <= 1e-9, "pipeline identity off by {err}");
    }
    passed("criterion 8 (SVD structure)", "padding exactly zero, pipeline within 1e-9, k = 2 on (3,2,0.5)/t=1");
}

#[test]
fn criterion_09_power_contract() {
    let mut rng = RngStream::new(0xc9, 0).rng();
    let h = random_gaussian_matrix(8, &mut rng);
    let power = 1.0;

    let per = InversionScheme::new(
        BlockTriCodec::new(frozen_blocktri(2)),
        h.clone(),
        power,
        NormMode::PerCodeword,
    )
    .expect("scheme");
    for _ in 0..2000 {
        let m = per.codec().random_message(&mut rng);
        let ct = per.encode(&m).expect("encode");
        assert!(
            ct.x.norm_sq() / 8.0 <= power * (1.0 + 1e-9),
            "per-codeword power {} exceeded",
            ct.x.norm_sq() / 8.0
        );
    }

    let ens = InversionScheme::new(
        BlockTriCodec::new(frozen_blocktri(2)),
        h,
        power,
        NormMode::EnsembleAverage,
    )
    .expect("scheme");
    let trials = 10_000u64;
    let mut total = 0.0;
    for _ in 0..trials {
        let m = ens.codec().random_message(&mut rng);
        total += ens.encode(&m).expect("encode").x.norm_sq() / 8.0;
    }
    let mean = total / trials as f64;
    assert!(
        (mean - power).abs() <= 0.05 * power,
        "ensemble mean power {mean} is more than 5% from {power}"
    );
    passed(
        "criterion 9 (power contract)",
        format!("per-codeword bound exact over 2000, ensemble mean {mean:.4} within 5%"),
    );
}

#[test]
fn criterion_10_determinism() {
    let config = default_config();
    assert_eq!(config.seed, 42, "default config seed drifted");
    let a = sim::run(&config).expect("first run");
    let b = sim::run(&config).expect("second run");
    let trials_a = report::records_csv(&a.records, &config.attacks).expect("csv");
    let trials_b = report::records_csv(&b.records, &config.attacks).expect("csv");
    assert_eq!(trials_a, trials_b, "per-trial CSVs differ between identical runs");
    let report_a = report::report_csv(&a.summary).expect("csv");
    let report_b = report::report_csv(&b.summary).expect("csv");
    assert_eq!(report_a, report_b, "sweep report CSVs differ between identical runs");

    // Structural row count: one bob row plus one per attack, per snr point.
    let rows = report_a.lines().count() - 1;
    assert_eq!(rows, config.snr_grid.len() * (1 + config.attacks.len()));

    // No NaN anywhere in the persisted output.
    assert!(!trials_a.contains("nan") && !report_a.contains("nan"));
    passed(
        "criterion 10 (determinism)",
        format!("two seed-42 runs byte-identical ({} trial rows)", a.records.len()),
    );
}

#[test]
fn invariant_bob_ser_nonincreasing_in_snr() {
    // Sanity invariant on the frozen default config: bob's error rate must
    // not increase with snr, allowing one interval-overlap violation.
    let config = default_config();
    let output = sim::run(&config).expect("run");
    let bob_rows: Vec<_> = output.summary.points.iter().filter(|p| p.party == "bob").collect();
    assert_eq!(bob_rows.len(), config.snr_grid.len());
    let mut violations = 0;
    for pair in bob_rows.windows(2) {
        if pair[1].ser > pair[0].ser {
            // Overlapping intervals excuse a small wobble.
            if pair[1].ci_lo > pair[0].ci_hi {
                violations += 1;
            }
        }
    }
    assert!(violations <= 1, "bob ser increased with snr beyond interval overlap");
    passed("invariant (bob ser monotone in snr)", "nonincreasing across the frozen grid");
}
