//! Experiment harness: declarative configs, the seeded Monte Carlo runner,
//! report writers, the asymmetry gate, and the selftest suites.

pub mod config;
pub mod report;
pub mod run;
pub mod selftest;
pub mod validate;

pub use config::{default_config, default_config_toml, AttackKind, ExperimentConfig, SchemeKind};
pub use report::{format_g, plotdata, records_csv, report_csv, wilson_interval};
pub use run::{run, summarize, RunOutput, Summary, SummaryPoint, TrialRecord};
pub use selftest::{run_selftest, CheckOutcome};
pub use validate::{validate_asymmetry, AsymmetryThresholds, PointVerdict};
