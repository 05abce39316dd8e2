//! Experiment configuration, seeded replications, aggregation and output
//! files.

pub mod config;
pub mod experiment;
pub mod output;
pub mod stats;

pub use config::{load_config, ExperimentConfig, Market, MarketSource, NegotiatorSpec};
pub use experiment::{
    run_experiment, run_once, verify, AggregateStats, ExperimentResult, RunRecord, Verdict,
};
pub use output::{write_outputs, StateFile};
