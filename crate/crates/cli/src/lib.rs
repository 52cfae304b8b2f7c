//! Scenario files, figure presets and output writers for the `amrtriad`
//! command-line tool.

pub mod config;
pub mod output;
pub mod preset;
pub mod runner;
pub mod validate;

pub use config::{ConfigError, ScenarioConfig, parse_config, serialize};
pub use preset::preset;
pub use runner::{RunReport, run_scenario};
