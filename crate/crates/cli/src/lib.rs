//! Library side of the `helmbie` command-line tool: configuration, run
//! orchestration and the verification suite.

pub mod config;
pub mod error;
pub mod run;
pub mod verify;

pub use config::RunConfig;
pub use error::CliError;
pub use run::{run_solve, run_sweep, RunReport};
pub use verify::{run_verify, Suite, VerifyReport};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "HELMBIE_THREADS";

/// Configures the global thread pool from `HELMBIE_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(THREADS_ENV, format!("expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(THREADS_ENV, e.to_string()))
}
