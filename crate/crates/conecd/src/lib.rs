//! Command-line driver for `conecd-core`: JSON experiment configs, task
//! runners and report files.
//!
//! A run reads an [`ExperimentConfig`], executes one [`Task`] entirely in
//! memory and only then writes `<task>.json` plus CSV exports. Exit status
//! is 0 on a completed run (violated inequalities are results), 2 on config
//! errors and 3 on numerical failures such as a disconnected graph.

pub mod config;
pub mod error;
pub mod output;
pub mod tasks;

pub use config::{ConeConfig, DensitySpec, ExperimentConfig, Task, TaskParams};
pub use error::{CliError, CliResult};
pub use output::RunOutput;
pub use tasks::run;

/// Sizes the global thread pool from `CONECD_THREADS`, if set.
pub fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("CONECD_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("CONECD_THREADS={v} is not a thread count")))?;
    // a pool that is already initialised keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
