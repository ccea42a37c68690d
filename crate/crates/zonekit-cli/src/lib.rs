//! Configuration and pipeline for the `zonekit` command-line tool.
//!
//! A run reads a JSON config, computes the requested diagram, writes the
//! exports and a versioned `summary.json`, and optionally runs the checks
//! listed in the config.

pub mod config;
pub mod run;

pub use config::{apply_override, CheckId, ConfigError, ExportKind, Prepared, RunConfig, SeedMode};
pub use run::{run, CheckOutcome, CheckStatus, RunError, RunOptions, Summary, SUMMARY_SCHEMA, SUMMARY_VERSION};

/// Exit status for a config that fails to parse or validate.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when a requested check fails or the run aborts.
pub const EXIT_FAILURE: i32 = 1;

/// Sizes the global worker pool from `ZONEKIT_THREADS` (unset or 0 means
/// one worker per core).
pub fn init_threads() -> Result<(), String> {
    let n = match std::env::var("ZONEKIT_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| format!("ZONEKIT_THREADS must be a number, got `{v}`"))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}
