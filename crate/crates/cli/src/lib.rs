//! Command-line driver for the `strobofp` library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod table;

pub use config::{Cli, RunConfig};
pub use error::{CliError, CliResult};

/// Size the global worker pool from `STROBOFP_THREADS`, if set.
pub fn init_thread_pool(var: Option<&str>) -> CliResult {
    let Some(v) = var else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::usage(format!(
            "STROBOFP_THREADS must be a positive integer, got '{v}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(e.into()))
}
