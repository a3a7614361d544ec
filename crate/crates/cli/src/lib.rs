//! Command-line front end: configuration ingestion, CSV/JSON output and run manifests.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

pub use commands::{run, Cli, CliError};
pub use config::{load_config, parse_config, ConfigError, ResolvedConfig};
pub use manifest::{verify_manifest, RunManifest};
pub use output::{emit_trajectory, TrajectoryRow, TRAJECTORY_HEADER};
