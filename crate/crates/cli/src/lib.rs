//! Configuration, presets and output for the `cogbeam` command-line tool.

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;

pub use config::{parse_config, ConfigError, FileConfig};
pub use presets::{ExperimentPreset, PresetName};
