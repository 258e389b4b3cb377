//! Walk-through of the block-lower-triangular codec: assemble the parity
//! check, encode a message by per-block closest-to-origin solving, verify
//! the congruence, and decode through noise.
//!
//! Usage: cargo run --release --example blocktri_codec

use lattice_wiretap::blocktri::BlockMessage;
use lattice_wiretap::channel::RngStream;
use lattice_wiretap::linalg::Vector;
use lattice_wiretap::sim::selftest::frozen_blocktri;
use rand_distr::Distribution;

fn main() {
    let params = frozen_blocktri(4);
    let f = params.assemble_f();
    println!(
        "parity check F: {}x{} over Z_{}, {} diagonal blocks of K ({}x{}), {} zero rows per block",
        f.rows(),
        f.cols(),
        params.modulus(),
        params.blocks(),
        params.check_rows(),
        params.block_len(),
        params.zero_rows()
    );
    for i in 0..f.rows() {
        let row: Vec<String> = (0..f.cols()).map(|j| f.get(i, j).to_string()).collect();
        println!("  [{}]", row.join(" "));
    }

    let message = BlockMessage::new(vec![3, 1, 4, 2]);
    println!("\nmessage symbols: {:?}", message.symbols());
    let cw = params.encode(&message).expect("encode");
    println!("integer solution X (centered, per block closest to origin):");
    for blk in 0..params.blocks() {
        let chunk = &cw.x_int[blk * params.block_len()..(blk + 1) * params.block_len()];
        println!("  block {}: {:?}", blk + 1, chunk);
    }
    assert!(params.satisfies_congruence(&cw.x_int, &message));
    println!("congruence F X = [0; m] (mod {}) holds exactly", params.modulus());

    let d_min = frozen_blocktri(2).min_distance_estimate().expect("within caps");
    println!("\ntwo-block variant minimum distance: {d_min:.6}");

    let sigma = 0.05 * d_min;
    let mut rng = RngStream::new(9, 0).rng();
    let mut wrong = 0;
    let trials = 2000;
    for _ in 0..trials {
        let m = params.random_message(&mut rng);
        let cw = params.encode(&m).expect("encode");
        let noisy = Vector::from_fn(cw.lattice_point.len(), |i| {
            let draw: f64 = rand_distr::StandardNormal.sample(&mut rng);
            cw.lattice_point.get(i) + sigma * draw
        });
        if params.decode(&noisy, sigma).expect("decode") != m {
            wrong += 1;
        }
    }
    println!(
        "sequential decoder at sigma = 0.05 d_min: {wrong}/{trials} block errors ({:.4}%)",
        100.0 * wrong as f64 / trials as f64
    );
}
