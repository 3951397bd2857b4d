//! Scenario runner and property audits for the `bundleobs` observers.
//!
//! The `bundleobs-sim` binary wraps [`cli::main_with_args`]; the modules are
//! public so tests and other tools can drive scenarios in memory.

pub mod audit;
pub mod cli;
pub mod runner;
pub mod scenario;

pub use runner::{run_scenario, simulate_scenario, Outputs, Report, RunError, Table};
pub use scenario::{ConfigError, Scenario, SystemKind};
