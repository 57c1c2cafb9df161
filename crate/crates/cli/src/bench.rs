//! Runtime of the swap-count estimator against the O(n²) double sum on
//! bivariate normal data with a prescribed Kendall's tau.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use kendall_core::oracle::brute_force_bivariate;
use kendall_core::simulate::{cholesky_factor, replicate_rng, rho_from_tau, sample_gaussian};
use kendall_core::{bivariate_jackknife, pair_from_xy, Matrix};
use serde::Serialize;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Implementation {
    Fast,
    Naive,
}

impl FromStr for Implementation {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "fast" => Ok(Self::Fast),
            "naive" => Ok(Self::Naive),
            other => Err(CliError::Usage(format!("unknown implementation '{other}'"))),
        }
    }
}

impl fmt::Display for Implementation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fast => "fast",
            Self::Naive => "naive",
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub n_list: Vec<usize>,
    pub tau_list: Vec<f64>,
    pub implementations: Vec<Implementation>,
    pub reps: usize,
    pub warmup: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    #[serde(rename = "impl")]
    pub implementation: Implementation,
    pub n: usize,
    pub tau: f64,
    pub median_ns: f64,
    pub q1_ns: f64,
    pub q3_ns: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("impl,n,tau,median_ns,q1_ns,q3_ns,reps\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.implementation,
                r.n,
                r.tau,
                crate::sig15(r.median_ns),
                crate::sig15(r.q1_ns),
                crate::sig15(r.q3_ns),
                r.reps
            ));
        }
        out
    }

    pub fn median(&self, implementation: Implementation, n: usize, tau: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.implementation == implementation && r.n == n && r.tau == tau)
            .map(|r| r.median_ns)
    }
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn bivariate_normal(n: usize, tau: f64, seed: u64) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let rho = rho_from_tau(tau)?;
    let l = cholesky_factor(&Matrix::from_rows(&[[1.0, rho], [rho, 1.0]]))?;
    let data = sample_gaussian(&l, n, &mut replicate_rng(seed, n as u64));
    Ok((data.column(0), data.column(1)))
}

fn run_once(implementation: Implementation, x: &[f64], y: &[f64]) -> CliResult<f64> {
    let start = Instant::now();
    let sample = pair_from_xy(x, y)?;
    let r = match implementation {
        Implementation::Fast => bivariate_jackknife(&sample)?,
        Implementation::Naive => brute_force_bivariate(&sample)?,
    };
    black_box(r);
    Ok(start.elapsed().as_nanos() as f64)
}

pub fn run_bench(config: &BenchConfig) -> CliResult<BenchReport> {
    if config.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if config.n_list.iter().any(|&n| n < 2) {
        return Err(CliError::Usage("every n must be at least 2".into()));
    }
    if config.tau_list.iter().any(|t| !(*t > -1.0 && *t < 1.0)) {
        return Err(CliError::Usage("every tau must lie in (-1, 1)".into()));
    }
    let mut rows = Vec::new();
    for &implementation in &config.implementations {
        for &n in &config.n_list {
            for &tau in &config.tau_list {
                let (x, y) = bivariate_normal(n, tau, config.seed)?;
                for _ in 0..config.warmup {
                    run_once(implementation, &x, &y)?;
                }
                let mut times = (0..config.reps)
                    .map(|_| run_once(implementation, &x, &y))
                    .collect::<CliResult<Vec<f64>>>()?;
                times.sort_unstable_by(f64::total_cmp);
                rows.push(BenchRow {
                    implementation,
                    n,
                    tau,
                    median_ns: quantile(&times, 0.5),
                    q1_ns: quantile(&times, 0.25),
                    q3_ns: quantile(&times, 0.75),
                    reps: config.reps,
                });
            }
        }
    }
    Ok(BenchReport { rows })
}
