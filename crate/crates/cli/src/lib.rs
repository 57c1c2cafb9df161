//! Library side of the `kendall` command-line tool: CSV ingestion, the
//! command implementations and the runtime benchmark.

pub mod bench;
pub mod commands;
pub mod dataset;
mod error;

pub use error::{CliError, CliResult};

/// Rounds to 15 significant digits, the precision of every number written by
/// the CLI.
pub fn sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// `sig15` applied element-wise.
pub fn sig15_vec(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(sig15).collect()
}
