//! Scenario configuration, the built-in catalog, batch runs and report emission.

pub mod catalog;
pub mod config;
pub mod emit;
pub mod report;
pub mod run;

pub use config::{parse_config, Format, ScenarioConfig};
pub use emit::emit;
pub use report::RunReport;
pub use run::run_scenario;
