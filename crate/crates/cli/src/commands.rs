use std::fs;
use std::io::Write;
use std::path::Path;

use kendall_core::exch_test::run_exch_test;
use kendall_core::kendall::pair_from_xy_with_order;
use kendall_core::simulate::{
    run_study, Factorization, ReplicateStatus, StudyConfig, StudyResult,
};
use kendall_core::{
    bivariate_jackknife, pairwise_jackknife, sigma_hat_dense, structured_sigma, Error, PairIndex,
};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::Dataset;
use crate::{sig15, sig15_vec, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    pub x: String,
    pub y: String,
    pub n: usize,
    pub tau_hat: f64,
    pub sigma2_hat: f64,
    pub se: f64,
    pub level: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    /// Pseudo-values `ĝ_i` by original row (only with `--per-obs`).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g_hat: Option<Vec<f64>>,
}

/// `τ̂`, `σ̂²`, `se = √(σ̂²/n)` and a normal-approximation interval for
/// columns `x` and `y`.
pub fn cmd_tau(
    ds: &Dataset,
    x: usize,
    y: usize,
    level: f64,
    per_obs: bool,
) -> CliResult<TauReport> {
    if x == y {
        return Err(CliError::Usage("tau needs two distinct columns".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(CliError::Usage(format!("level {level} not in (0, 1)")));
    }
    let (sample, order) = pair_from_xy_with_order(&ds.values.column(x), &ds.values.column(y))
        .map_err(|e| match e {
            Error::TiesDetected { column: Some(c) } => CliError::Ties {
                column: ds.column_names[if c == 0 { x } else { y }].clone(),
                value: None,
            },
            e => e.into(),
        })?;
    let r = bivariate_jackknife(&sample)?;
    let n = r.n;
    let se = (r.sigma2_hat / n as f64).sqrt();
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 + level / 2.0);
    let g_hat = per_obs.then(|| {
        let mut by_row = vec![0.0; n];
        for (k, &row) in order.iter().enumerate() {
            by_row[row] = sig15(r.g_hat[k]);
        }
        by_row
    });
    Ok(TauReport {
        x: ds.column_names[x].clone(),
        y: ds.column_names[y].clone(),
        n,
        tau_hat: sig15(r.tau_hat),
        sigma2_hat: sig15(r.sigma2_hat),
        se: sig15(se),
        level,
        ci_lower: sig15((r.tau_hat - z * se).max(-1.0)),
        ci_upper: sig15((r.tau_hat + z * se).min(1.0)),
        g_hat,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixMode {
    Dense,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairLabel {
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredReport {
    pub sigma0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauMatrixReport {
    pub n: usize,
    pub p: usize,
    /// Lexicographic pair order shared by `tau` and `sigma_hat`.
    pub pairs: Vec<PairLabel>,
    pub tau: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma_hat: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub structured: Option<StructuredReport>,
}

fn named_ties(ds: &Dataset, e: Error) -> CliError {
    match e {
        Error::TiesDetected { column: Some(c) } => CliError::Ties {
            column: ds.column_names[c].clone(),
            value: None,
        },
        e => e.into(),
    }
}

pub fn cmd_taumatrix(ds: &Dataset, mode: MatrixMode) -> CliResult<TauMatrixReport> {
    let p = ds.p();
    if mode == MatrixMode::Structured && p < 4 {
        return Err(Error::DimensionTooSmall {
            what: "dimension",
            got: p,
            min: 4,
        }
        .into());
    }
    let (tau, g) = pairwise_jackknife(&ds.values).map_err(|e| named_ties(ds, e))?;
    let pairs = PairIndex::all(p)
        .map(|pr| PairLabel {
            a: ds.column_names[pr.a].clone(),
            b: ds.column_names[pr.b].clone(),
        })
        .collect();
    let (sigma_hat, structured) = match mode {
        MatrixMode::Dense => {
            let s = sigma_hat_dense(&g);
            let rows = (0..s.rows()).map(|i| sig15_vec(s.row(i))).collect();
            (Some(rows), None)
        }
        MatrixMode::Structured => {
            let s = structured_sigma(&g)?;
            (
                None,
                Some(StructuredReport {
                    sigma0: sig15(s.sigma0),
                    sigma1: sig15(s.sigma1),
                    sigma2: sig15(s.sigma2),
                }),
            )
        }
    };
    Ok(TauMatrixReport {
        n: ds.n(),
        p,
        pairs,
        tau: sig15_vec(&tau.values),
        sigma_hat,
        structured,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchReport {
    pub n: usize,
    pub p: usize,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

pub fn cmd_exchtest(ds: &Dataset) -> CliResult<ExchReport> {
    let r = run_exch_test(&ds.values).map_err(|e| named_ties(ds, e))?;
    Ok(ExchReport {
        n: r.n,
        p: r.p,
        statistic: sig15(r.statistic),
        dof: r.dof,
        p_value: sig15(r.p_value),
        lambda1: sig15(r.eigenvalues.0),
        lambda2: sig15(r.eigenvalues.1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfigEcho {
    pub departure: String,
    pub delta: f64,
    pub rho: f64,
    pub n: usize,
    pub p: usize,
    pub reps: usize,
    pub seed: u64,
    pub unit_diag: bool,
    pub psd_clip: bool,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub alpha: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub config: SimulateConfigEcho,
    pub rejection_rates: Vec<RateReport>,
    pub successes: usize,
    pub failures: usize,
}

/// One row per replicate: `index,p_value,status` (empty p-value on failure).
pub fn study_csv(result: &StudyResult) -> String {
    let mut out = String::from("index,p_value,status\n");
    for r in &result.replicates {
        let p = r.p_value.map(|v| sig15(v).to_string()).unwrap_or_default();
        let status = match r.status {
            ReplicateStatus::Ok => "ok",
            ReplicateStatus::Degenerate => "degenerate",
        };
        out.push_str(&format!("{},{},{}\n", r.index, p, status));
    }
    out
}

pub fn study_summary(result: &StudyResult) -> SimulateSummary {
    let c = &result.config;
    SimulateSummary {
        config: SimulateConfigEcho {
            departure: c.spec.kind.to_string(),
            delta: c.spec.delta,
            rho: c.spec.rho,
            n: c.n,
            p: c.spec.p,
            reps: c.reps,
            seed: c.seed,
            unit_diag: c.spec.unit_diag,
            psd_clip: c.factorization == Factorization::PsdClip,
            alpha: c.alpha_levels.clone(),
        },
        rejection_rates: result
            .rejection_rates
            .iter()
            .map(|r| RateReport {
                alpha: r.alpha,
                rate: sig15(r.rate),
            })
            .collect(),
        successes: result.replicates.len() - result.failures,
        failures: result.failures,
    }
}

/// Runs a study and, when `out_dir` is given, writes `pvalues.csv` and
/// `summary.json` into it.
pub fn cmd_simulate(
    config: &StudyConfig,
    out_dir: Option<&Path>,
) -> CliResult<(StudyResult, SimulateSummary)> {
    let result = run_study(config)?;
    let summary = study_summary(&result);
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("pvalues.csv"), study_csv(&result))?;
        let mut f = fs::File::create(dir.join("summary.json"))?;
        serde_json::to_writer_pretty(&mut f, &summary)?;
        writeln!(f)?;
    }
    Ok((result, summary))
}
