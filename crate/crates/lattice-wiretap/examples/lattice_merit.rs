//! Figures of merit for a few reference lattices: Monte Carlo normalized
//! second moment and the volume-to-noise ratio.
//!
//! Usage: cargo run --release --example lattice_merit [samples] [seed]
//!
//! The 1e7-sample run of this example is the oracle behind the frozen
//! hexagonal NSM constant used by the selftest and acceptance suites.

use lattice_wiretap::lattice::Lattice;

fn main() {
    let mut args = std::env::args().skip(1);
    let samples: u64 = args.next().map(|s| s.parse().expect("samples")).unwrap_or(100_000);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(7);

    println!("{samples} samples per lattice, seed {seed}\n");
    println!("{:<12} {:>10} {:>12} {:>12} {:>10}", "lattice", "volume", "nsm", "stderr", "vnr@1");

    for dim in 1..=4usize {
        let lat = Lattice::standard(dim);
        let report = lat.estimate_nsm(samples, seed).expect("within the exact-CVP cap");
        println!(
            "{:<12} {:>10.6} {:>12.7} {:>12.2e} {:>10.6}",
            format!("Z^{dim}"),
            report.volume,
            report.nsm_estimate,
            report.nsm_stderr,
            report.vnr
        );
    }

    let hex = Lattice::hexagonal();
    let report = hex.estimate_nsm(samples, seed).expect("2-d is within the cap");
    println!(
        "{:<12} {:>10.6} {:>12.7} {:>12.2e} {:>10.6}",
        "hexagonal", report.volume, report.nsm_estimate, report.nsm_stderr, report.vnr
    );
    println!(
        "\nreference: Z^n has NSM 1/12 = {:.7}; the hexagonal lattice improves on it.",
        1.0 / 12.0
    );
}
