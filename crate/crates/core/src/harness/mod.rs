//! Experiment configuration, replicated runs and the file outputs behind the
//! command-line tool.

mod commands;
pub mod config;
pub mod experiment;

pub use commands::{
    cmd_complete, cmd_experiment, cmd_lti, cmd_simulate, interval_csv_string, replication_dir, status_csv_string,
    CompleteOptions, ExperimentOutcome, LtiOutcome,
};
pub use config::{BaselineGrid, Estimator, ExperimentConfig, ExperimentKind, LtiSettings};
pub use experiment::{ResultRow, ResultTable};
