//! Experiment runner for the billiard pressure studies: configuration files,
//! the eigenbasis cache, CSV/JSON outputs with a manifest, and SVG renderings.

pub mod archive;
pub mod config;
pub mod experiments;
pub mod output;
pub mod svg;

pub use archive::Archive;
pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{run, RunOutcome};
