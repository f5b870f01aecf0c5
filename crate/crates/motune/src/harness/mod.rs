//! Experiment runner: optimizer x problem x seed matrices under a step
//! budget, persisted run records, and hypervolume comparison reports.

mod compare;
mod config;
mod experiment;
mod persist;

pub use compare::{compare, ComparisonReport, VariantSeries};
pub use config::{ExperimentConfig, ExperimentFile, Variant, VARIANT_NAMES};
pub use experiment::{emit_plot_data, run_experiment, ExperimentOutcome};
pub use persist::{load_all_records, load_record, record_dir, save_record, HarnessError};
