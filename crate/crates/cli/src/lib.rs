//! Library half of the `rlt` batch runner: config loading, task execution
//! and report writing.

pub mod config;
pub mod run;
pub mod tasks;

pub use config::{ConfigParseError, ExperimentConfig, Loaded};
pub use run::{execute, exit_code, write_reports, TaskResult};
