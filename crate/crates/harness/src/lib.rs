//! Experiment harness: ratings ingestion, synthetic instances, configuration,
//! and multi-seed runs that write CSV traces.

pub mod config;
mod error;
pub mod experiment;
pub mod ratings;
pub mod synth;

pub use config::{DataSource, ExperimentConfig, ObjectiveKind, RawConfig, SolverChoice};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentOutput};
