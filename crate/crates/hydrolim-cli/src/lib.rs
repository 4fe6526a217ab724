//! Experiment harness for the hydrostatic-limit simulation lab: experiment
//! configuration, eps sweeps with paired compressible/hydrostatic runs,
//! diagnostics series on disk, rate tables, binary checkpoints, and the
//! runtime self-check suites behind the CLI.

pub mod checkpoint;
pub mod checks;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use checkpoint::{checkpoint_read, checkpoint_write};
pub use config::{ExperimentConfig, IcConfig, IcKind, SchemeConfig};
pub use error::HarnessError;
pub use experiment::{
    aggregate, csv_name, fit_rates, format_rate_table, load_summary, run_experiment,
    verify_summary_against_csv, Aggregates, EpsRunSummary, NamedRate, RunOptions, RunSummary,
    SUMMARY_FILE,
};
