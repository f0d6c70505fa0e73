//! Named experiments reproducing the figure data, configuration handling
//! and run manifests.

pub mod config;
pub mod manifest;
pub mod runner;

pub use config::{load_config, parse_config, ExperimentConfig, ExperimentId, RunParameters};
pub use manifest::{FileEntry, RunManifest};
pub use runner::run_experiment;
