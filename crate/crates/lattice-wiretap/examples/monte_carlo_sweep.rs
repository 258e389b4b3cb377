//! Drive the experiment harness from code: run the bundled default config,
//! print the sweep report, and check the asymmetry gate.
//!
//! Usage: cargo run --release --example monte_carlo_sweep [trials_per_point]

use lattice_wiretap::sim::{
    self, default_config, report, validate::AsymmetryThresholds,
};

fn main() {
    let trials: Option<u64> = std::env::args().nth(1).map(|s| s.parse().expect("trials"));

    let mut config = default_config();
    if let Some(t) = trials {
        config.trials_per_point = t;
    }
    println!(
        "running {} trials x {} snr points (seed {})...\n",
        config.trials_per_point,
        config.snr_grid.len(),
        config.seed
    );

    let output = sim::run(&config).expect("run");
    print!("{}", report::report_csv(&output.summary).expect("report"));

    println!();
    let verdicts = sim::validate_asymmetry(&output.records, &AsymmetryThresholds::default())
        .expect("enough trials to decide");
    for v in &verdicts {
        let ratio = v.ratio.map(|r| format!("{r:.1}")).unwrap_or_else(|| "inf".to_string());
        println!(
            "snr {:>8}: bob {:.4} vs best attack ({}) {:.4}, ratio {ratio}, proxy {:.1}% -> {}",
            report::format_g(v.snr),
            v.bob_ser,
            v.best_attack.label(),
            v.best_eve_ser,
            100.0 * v.proxy_fraction,
            if v.passed { "pass" } else { &v.diagnostic }
        );
    }
    println!(
        "\ntotal decode wall time {:.2}s across {} trials, {} channel resamples",
        output.summary.total_wall_time_s,
        output.records.len(),
        output.summary.total_resamples
    );
}
