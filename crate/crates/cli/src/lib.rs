//! Batch verification runner: loads a run-config, evaluates the selected
//! suites over sampled points of `T(M)` and produces JSON/CSV reports.

pub mod config;
pub mod report;
pub mod runner;
pub mod sampling;
pub mod suites;

pub use config::{ConfigError, Overrides, RunConfig, SamplingSpec, ValidConfig};
pub use report::{Report, SuiteReport};
pub use runner::run;
pub use suites::{Direction, SuiteId};

/// Process exit codes.
pub mod exit {
    pub const ALL_PASS: i32 = 0;
    pub const SOME_FAIL: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
}

/// The suite catalogue as printed by `list-suites`.
pub fn suite_catalogue() -> Vec<String> {
    SuiteId::ALL
        .iter()
        .map(|s| format!("{:<14} → {} (default tolerance {:.0e})", s.name(), s.anchor(), s.default_tolerance()))
        .collect()
}
