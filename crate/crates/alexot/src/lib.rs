//! File formats, orchestration, verification and rendering behind the
//! `alexot` command-line tool. All numerics live in `alexot-core`.

pub mod error;
pub mod format;
pub mod gen;
pub mod render;
pub mod solve;
pub mod verify;

pub use error::{CliError, Result};
pub use format::{ProblemFile, SolutionFile};

/// Environment variable that takes precedence over `--threads`.
pub const THREADS_ENV: &str = "ALEXOT_THREADS";

/// Worker count: the environment variable when set, else `flag`, else the
/// rayon default (zero).
pub fn thread_count(flag: Option<usize>) -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(flag.unwrap_or(0)),
    }
}

/// Sizes the global pool used by the parallel cell construction.
pub fn init_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))
}
