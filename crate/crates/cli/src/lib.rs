//! Scenario runner and validation suite for `surfvortex-core`.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod validate;

pub use config::ScenarioConfig;
pub use error::CliError;
pub use run::{resolve_output_dir, run_scenario, Command, RunReport, OUTPUT_ROOT_ENV};
pub use validate::{validate_suite, Level};
