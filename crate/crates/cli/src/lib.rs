//! Batch driver for the `halflie-core` experiments: JSON configs in,
//! deterministic CSV, JSON or SVG reports out.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod report;

pub use config::{parse_config, ConfigError, ExperimentConfig, ExperimentKind, Format};
pub use experiment::{run_experiment, RunError, RunOptions, RunOutput};
pub use report::{emit_report, Manifest, Report};
