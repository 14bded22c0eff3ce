//! Scenario runner and acceptance harness for `dephase-core`.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod report;
pub mod scenarios;
pub mod table;

pub use config::{parse_config, ScenarioConfig, ScenarioId};
pub use error::{CliError, Result};
pub use scenarios::{run_scenario, ScenarioOutput};
