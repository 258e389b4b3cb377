//! The SVD scheme end-to-end: diagonalize the legitimate channel, keep the
//! singular dimensions above the gain threshold, and communicate a
//! k-dimensional lattice point by truncated inverse water-filling.
//!
//! Usage: cargo run --release --example svd_scheme [trials] [seed]

use lattice_wiretap::channel::{sample_channel_pair, transmit, ChannelDist, RngStream};
use lattice_wiretap::codec::{BlockTriCodec, LatticeCodec};
use lattice_wiretap::linalg::svd;
use lattice_wiretap::scheme::{NormMode, SvdScheme};
use lattice_wiretap::sim::selftest::frozen_blocktri;

fn main() {
    let mut args = std::env::args().skip(1);
    let trials: u64 = args.next().map(|s| s.parse().expect("trials")).unwrap_or(2000);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(11);

    let n = 8;
    // k = 4 singular dimensions carry a single-block codec (b = 4).
    let codec = BlockTriCodec::new(frozen_blocktri(1));
    let d_min = frozen_blocktri(1).min_distance_estimate().expect("within caps");

    let mut rng = RngStream::new(seed, u64::MAX).rng();
    let pair = sample_channel_pair(n, ChannelDist::Gaussian, &mut rng).expect("channel");
    let f = svd(&pair.h).expect("svd");
    let spectrum: Vec<String> =
        f.singular_values.as_slice().iter().map(|s| format!("{s:.3}")).collect();
    let t = (f.singular_values.get(3) + f.singular_values.get(4)) / 2.0;
    println!("singular values: [{}]", spectrum.join(", "));
    println!("threshold t = {t:.3} (median) keeps k = 4 dimensions\n");

    let scheme = SvdScheme::new(codec, pair.h.clone(), t, 1.0, NormMode::EnsembleAverage)
        .expect("scheme");
    let c = scheme.ensemble_c().expect("ensemble constant");
    let sigma = 0.05 * c * d_min;
    println!("ensemble constant c = {c:.4}, sigma = 0.05 c d_min = {sigma:.5}");

    let mut bob_errors = 0u64;
    let mut eve_errors = 0u64;
    for trial in 0..trials {
        let mut rng = RngStream::new(seed, trial).rng();
        let m = scheme.codec().random_message(&mut rng);
        let ct = scheme.encode(&m).expect("encode");

        let y_b = transmit(&pair.h, &ct.x, sigma, &mut rng).expect("bob link");
        if scheme.decode_bob(&y_b, ct.c).ok().as_deref() != Some(&m[..]) {
            bob_errors += 1;
        }

        let y_e = transmit(&pair.g, &ct.x, sigma, &mut rng).expect("eve link");
        let attack = scheme.eve_attack_whitened(&y_e, &pair.g, ct.c).expect("attack");
        if attack.message.as_deref() != Some(&m[..]) {
            eve_errors += 1;
        }
    }

    let rate = |e: u64| e as f64 / trials as f64;
    println!("\nbob           ser {:.6} ({bob_errors}/{trials})", rate(bob_errors));
    println!("eve whitened  ser {:.6} ({eve_errors}/{trials})", rate(eve_errors));
    println!("\nBob discards the {} weak dimensions; they carry only noise.", n - scheme.k());
}
