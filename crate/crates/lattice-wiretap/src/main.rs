//! Thin CLI over the library: run experiments, regenerate reports, gate on
//! the asymmetry criteria, and run the selftest suites.
//!
//! Exit codes: 0 success, 1 validation failure, 2 acceptance violation,
//! 3 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lattice_wiretap::sim::{
    self, config::ExperimentConfig, report, validate::AsymmetryThresholds,
};

#[derive(Parser)]
#[command(name = "lattice-wiretap", version, about = "Lattice-coded wiretap channel experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write records + reports.
    Run {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override trials per SNR point.
        #[arg(long)]
        trials: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Regenerate a report from a run directory.
    Report {
        /// Run directory produced by `run`.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output format.
        #[arg(long)]
        format: ReportFormat,
    },
    /// Check the eavesdropper-disadvantage gate on a run directory.
    Validate {
        /// Run directory produced by `run`.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run the built-in oracle-equivalence and calibration suites.
    Selftest,
}

#[derive(Copy, Clone, ValueEnum)]
enum ReportFormat {
    Csv,
    Plotdata,
}

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION: u8 = 1;
const EXIT_ACCEPTANCE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not failures.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(EXIT_VALIDATION);
            }
            print!("{e}");
            return ExitCode::from(EXIT_OK);
        }
    };
    let code = match cli.command {
        Command::Run { config, out, seed, trials, threads } => cmd_run(&config, &out, seed, trials, threads),
        Command::Report { input, format } => cmd_report(&input, format),
        Command::Validate { input } => cmd_validate(&input),
        Command::Selftest => cmd_selftest(),
    };
    ExitCode::from(code)
}

fn cmd_run(
    config_path: &Path,
    out: &Path,
    seed: Option<u64>,
    trials: Option<u64>,
    threads: Option<usize>,
) -> u8 {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return EXIT_RUNTIME;
        }
    };
    let mut config = match ExperimentConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid config {}: {e}", config_path.display());
            return EXIT_VALIDATION;
        }
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(trials) = trials {
        config.trials_per_point = trials;
    }
    if let Err(e) = config.validate() {
        eprintln!("error: invalid config after overrides: {e}");
        return EXIT_VALIDATION;
    }

    let run_it = || sim::run(&config);
    let output = if let Some(threads) = threads {
        let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: thread pool: {e}");
                return EXIT_RUNTIME;
            }
        };
        pool.install(run_it)
    } else {
        run_it()
    };
    let output = match output {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: run failed: {e}");
            return EXIT_RUNTIME;
        }
    };

    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return EXIT_RUNTIME;
    }
    let trials_csv = match report::records_csv(&output.records, &config.attacks) {
        Ok(csv) => csv,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let report_csv = match report::report_csv(&output.summary) {
        Ok(csv) => csv,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let plot = match report::plotdata(&output.summary) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let summary_toml = match toml::to_string_pretty(&output.summary) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: summary serialization: {e}");
            return EXIT_RUNTIME;
        }
    };
    let writes = [
        ("config.toml", config.to_toml()),
        ("trials.csv", trials_csv),
        ("report.csv", report_csv),
        ("plotdata.txt", plot),
        ("summary.toml", summary_toml),
    ];
    for (name, contents) in writes {
        if let Err(e) = std::fs::write(out.join(name), contents) {
            eprintln!("error: cannot write {name}: {e}");
            return EXIT_RUNTIME;
        }
    }
    println!(
        "wrote {} trials across {} snr points to {}",
        output.records.len(),
        config.snr_grid.len(),
        out.display()
    );
    for point in &output.summary.points {
        println!(
            "  snr {:>10} {:>4}/{:<9} ser {:.6} [{:.6}, {:.6}]",
            report::format_g(point.snr),
            point.party,
            point.attack.map(|a| a.label()).unwrap_or("-"),
            point.ser,
            point.ci_lo,
            point.ci_hi
        );
    }
    EXIT_OK
}

fn load_run_dir(input: &Path) -> Result<(ExperimentConfig, Vec<sim::TrialRecord>), (u8, String)> {
    let config_text = std::fs::read_to_string(input.join("config.toml"))
        .map_err(|e| (EXIT_RUNTIME, format!("cannot read config.toml: {e}")))?;
    let config = ExperimentConfig::from_toml(&config_text)
        .map_err(|e| (EXIT_VALIDATION, format!("invalid config.toml: {e}")))?;
    let records_text = std::fs::read_to_string(input.join("trials.csv"))
        .map_err(|e| (EXIT_RUNTIME, format!("cannot read trials.csv: {e}")))?;
    let records = report::parse_records_csv(&records_text, &config.attacks)
        .map_err(|e| (EXIT_VALIDATION, format!("invalid trials.csv: {e}")))?;
    Ok((config, records))
}

fn cmd_report(input: &Path, format: ReportFormat) -> u8 {
    let (config, records) = match load_run_dir(input) {
        Ok(v) => v,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let summary = sim::summarize(&config, &records);
    let rendered = match format {
        ReportFormat::Csv => report::report_csv(&summary),
        ReportFormat::Plotdata => report::plotdata(&summary),
    };
    match rendered {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    }
}

fn cmd_validate(input: &Path) -> u8 {
    let (_, records) = match load_run_dir(input) {
        Ok(v) => v,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let verdicts = match sim::validate_asymmetry(&records, &AsymmetryThresholds::default()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let mut all_passed = true;
    for v in &verdicts {
        let ratio = v.ratio.map(|r| report::format_g(r)).unwrap_or_else(|| "inf".to_string());
        println!(
            "snr {:>10}: bob ser {:.6}, best attack {} ser {:.6}, ratio {}, proxy {:.3} -> {}",
            report::format_g(v.snr),
            v.bob_ser,
            v.best_attack.label(),
            v.best_eve_ser,
            ratio,
            v.proxy_fraction,
            if v.passed { "pass" } else { &v.diagnostic }
        );
        all_passed &= v.passed;
    }
    if all_passed {
        EXIT_OK
    } else {
        EXIT_ACCEPTANCE
    }
}

fn cmd_selftest() -> u8 {
    let outcomes = sim::run_selftest();
    let mut all_passed = true;
    for o in &outcomes {
        println!("selftest: {:<32} {} ({})", o.name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        all_passed &= o.passed;
    }
    if all_passed {
        EXIT_OK
    } else {
        EXIT_ACCEPTANCE
    }
}
