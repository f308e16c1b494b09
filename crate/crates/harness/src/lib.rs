//! Experiment orchestration for the schemanet scenarios: configuration,
//! seeded runs, artifacts, plots and oracle reports.

pub mod config;
pub mod error;
pub mod oracle;
pub mod plot;
pub mod run;

pub use config::{ExperimentConfig, Scenario};
pub use error::HarnessError;
pub use run::{run, RunManifest, RunOutput};
