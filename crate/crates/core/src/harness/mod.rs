//! Experiment driver: configured parameter sets, Monte Carlo suites and
//! CSV output.

pub mod config;
pub mod experiment;
pub mod ks;
pub mod report;

pub use config::{ExperimentConfig, ParameterSet};
pub use experiment::{
    emit_plot_data, increment_oracle_gaps, mc_consistency_suite, mc_gap_suite, mc_pivot_suite, pilot_seeds,
    replicate_seeds, run_config, run_parameter_set, ParameterSetOutput, Setup,
};
pub use ks::{ks_critical_1pct, ks_statistic, median, quantile};
pub use report::{MonteCarloReport, ReportRow};
