//! Exact closest-vector search against Babai rounding on the hexagonal
//! lattice: the rounding attack is only exact on orthogonal bases, and the
//! gap is what the eavesdropper is left with.
//!
//! Usage: cargo run --release --example cvp_vs_babai [targets] [seed]

use lattice_wiretap::channel::RngStream;
use lattice_wiretap::lattice::Lattice;
use lattice_wiretap::linalg::Vector;
use rand::Rng;

fn main() {
    let mut args = std::env::args().skip(1);
    let targets: u64 = args.next().map(|s| s.parse().expect("targets")).unwrap_or(2000);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(3);

    let hex = Lattice::hexagonal();
    let radius = hex.default_search_radius();
    println!("hexagonal lattice, search radius {radius}, {targets} random targets\n");

    let mut rng = RngStream::new(seed, 0).rng();
    let mut babai_suboptimal = 0u64;
    let mut worst_gap = 0.0f64;
    let mut exact_sum = 0.0;
    let mut babai_sum = 0.0;
    for _ in 0..targets {
        let t = Vector::from_fn(2, |_| rng.random_range(-5.0..5.0));
        let exact = hex.cvp_exact(&t, radius).expect("2-d search");
        let babai = hex.babai_round(&t).expect("full-rank basis");
        assert!(exact.dist <= babai.dist + 1e-12, "exact search beaten");
        exact_sum += exact.dist;
        babai_sum += babai.dist;
        if babai.dist > exact.dist + 1e-9 {
            babai_suboptimal += 1;
            worst_gap = worst_gap.max(babai.dist - exact.dist);
        }
    }

    println!("mean exact distance  {:.6}", exact_sum / targets as f64);
    println!("mean babai distance  {:.6}", babai_sum / targets as f64);
    println!(
        "babai suboptimal on {babai_suboptimal}/{targets} targets ({:.1}%), worst gap {worst_gap:.6}",
        100.0 * babai_suboptimal as f64 / targets as f64
    );

    let z2 = Lattice::standard(2);
    let mut disagreements = 0;
    for _ in 0..targets {
        let t = Vector::from_fn(2, |_| rng.random_range(-5.0..5.0));
        if z2.cvp_exact(&t, 2).expect("search").coords != z2.babai_round(&t).expect("round").coords
        {
            disagreements += 1;
        }
    }
    println!("\non the orthogonal basis Z^2 the two agree everywhere: {disagreements} disagreements");
}
