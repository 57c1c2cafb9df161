//! Seeded Gaussian data and replicated size/power studies of the
//! exchangeability test.
//!
//! Standard normals come from the ziggurat sampler of `rand_distr` driven by
//! `ChaCha8Rng`. Replicate `r` of a study seeded with `s` uses its own stream
//! seeded with [`replicate_seed`]`(s, r)`, so results do not depend on the
//! order or thread in which replicates run.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::exch_test::run_exch_test;
use crate::matrix::jacobi_eigen;
use crate::{Error, Matrix, Result};

/// Perturbation applied to the equicorrelation matrix `(1-ρ)I + ρJ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DepartureKind {
    None,
    /// `+Δ` on the pair `{1, 2}`.
    Single,
    /// `+Δ` wherever variable 1 is not involved, diagonal included.
    Column,
    /// `+Δ` wherever `i + j` is odd.
    Check,
}

impl FromStr for DepartureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "single" => Ok(Self::Single),
            "column" => Ok(Self::Column),
            "check" => Ok(Self::Check),
            other => Err(Error::InvalidConfig(format!("unknown departure '{other}'"))),
        }
    }
}

impl fmt::Display for DepartureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::None => "none",
            Self::Single => "single",
            Self::Column => "column",
            Self::Check => "check",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DepartureSpec {
    pub kind: DepartureKind,
    pub delta: f64,
    pub rho: f64,
    pub p: usize,
    /// Rescale to unit diagonal after applying the departure (only changes
    /// `Column`).
    pub unit_diag: bool,
}

impl DepartureSpec {
    pub fn new(kind: DepartureKind, delta: f64, rho: f64, p: usize) -> Self {
        Self {
            kind,
            delta,
            rho,
            p,
            unit_diag: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidConfig(format!("p = {} < 2", self.p)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidConfig(format!("rho = {} not in [0, 1)", self.rho)));
        }
        if self.kind != DepartureKind::None && !(self.delta >= 0.0 && self.delta + self.rho < 1.0)
        {
            return Err(Error::InvalidConfig(format!(
                "delta = {} not in [0, 1 - rho)",
                self.delta
            )));
        }
        Ok(())
    }
}

/// How the correlation matrix is turned into a sampling factor `F` with
/// `F Fᵀ = R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Factorization {
    /// Cholesky; an indefinite matrix is an error.
    #[default]
    Cholesky,
    /// Symmetric square root with negative eigenvalues set to zero, i.e.
    /// sampling from the nearest positive semidefinite matrix in the
    /// Frobenius norm. Some departure matrices (e.g. check departures with
    /// `ρ + pΔ/2 > 1`) are indefinite and can only be sampled this way.
    PsdClip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub spec: DepartureSpec,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub alpha_levels: Vec<f64>,
    pub factorization: Factorization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplicateStatus {
    Ok,
    /// The covariance estimate had a non-positive whitening eigenvalue.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub index: usize,
    pub p_value: Option<f64>,
    pub statistic: Option<f64>,
    pub status: ReplicateStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectionRate {
    pub alpha: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub replicates: Vec<ReplicateOutcome>,
    pub rejection_rates: Vec<RejectionRate>,
    pub failures: usize,
}

impl StudyResult {
    /// p-values of the successful replicates, in replicate order.
    pub fn p_values(&self) -> Vec<f64> {
        self.replicates.iter().filter_map(|r| r.p_value).collect()
    }

    pub fn rejection_rate(&self, alpha: f64) -> f64 {
        rejection_rate(&self.p_values(), alpha)
    }
}

/// Fraction of `p_values` at or below `alpha` (NaN for an empty slice).
pub fn rejection_rate(p_values: &[f64], alpha: f64) -> f64 {
    let hits = p_values.iter().filter(|&&p| p <= alpha).count();
    hits as f64 / p_values.len() as f64
}

/// `τ = (2/π) arcsin ρ`, Kendall's tau of a bivariate normal.
pub fn tau_from_rho(rho: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::DomainError(format!("rho = {rho} outside [-1, 1]")));
    }
    Ok(std::f64::consts::FRAC_2_PI * rho.asin())
}

/// Inverse of [`tau_from_rho`].
pub fn rho_from_tau(tau: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&tau) {
        return Err(Error::DomainError(format!("tau = {tau} outside [-1, 1]")));
    }
    Ok((std::f64::consts::FRAC_PI_2 * tau).sin())
}

/// Equicorrelation matrix with the requested departure.
pub fn build_correlation(spec: &DepartureSpec) -> Result<Matrix> {
    spec.validate()?;
    let p = spec.p;
    let mut r = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let base = if i == j { 1.0 } else { spec.rho };
            let bump = match spec.kind {
                DepartureKind::None => false,
                DepartureKind::Single => (i.min(j), i.max(j)) == (0, 1),
                DepartureKind::Column => i != 0 && j != 0,
                DepartureKind::Check => (i + j) % 2 == 1,
            };
            r[(i, j)] = if bump { base + spec.delta } else { base };
        }
    }
    if spec.unit_diag {
        let scale: Vec<f64> = (0..p).map(|i| r[(i, i)].sqrt()).collect();
        for i in 0..p {
            for j in 0..p {
                r[(i, j)] /= scale[i] * scale[j];
            }
        }
    }
    Ok(r)
}

/// Lower-triangular `L` with `L Lᵀ = m`.
pub fn cholesky_factor(m: &Matrix) -> Result<Matrix> {
    let p = m.rows();
    if m.cols() != p {
        return Err(Error::LengthMismatch {
            left: p,
            right: m.cols(),
        });
    }
    let mut l = Matrix::zeros(p, p);
    for j in 0..p {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > 1e-12) {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let root = pivot.sqrt();
        l[(j, j)] = root;
        for i in (j + 1)..p {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / root;
        }
    }
    Ok(l)
}

/// `V diag(√max(λ, 0)) Vᵀ` from the eigendecomposition `m = V diag(λ) Vᵀ`.
pub fn psd_clip_factor(m: &Matrix) -> Result<Matrix> {
    let p = m.rows();
    if m.cols() != p {
        return Err(Error::LengthMismatch {
            left: p,
            right: m.cols(),
        });
    }
    let (vals, vecs) = jacobi_eigen(m);
    let mut f = Matrix::zeros(p, p);
    for (k, &lambda) in vals.iter().enumerate() {
        let root = lambda.max(0.0).sqrt();
        if root == 0.0 {
            continue;
        }
        for i in 0..p {
            let vi = vecs[(i, k)] * root;
            for j in 0..p {
                f[(i, j)] += vi * vecs[(j, k)];
            }
        }
    }
    Ok(f)
}

pub fn sampling_factor(m: &Matrix, how: Factorization) -> Result<Matrix> {
    match how {
        Factorization::Cholesky => cholesky_factor(m),
        Factorization::PsdClip => psd_clip_factor(m),
    }
}

/// `n` rows of `F z` with `z` standard normal (`F` any square factor).
pub fn sample_gaussian<R: Rng + ?Sized>(f: &Matrix, n: usize, rng: &mut R) -> Matrix {
    let p = f.rows();
    let mut out = Matrix::zeros(n, p);
    let mut z = vec![0.0; p];
    for i in 0..n {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let row = out.row_mut(i);
        for (a, slot) in row.iter_mut().enumerate() {
            *slot = f.row(a).iter().zip(&z).map(|(x, y)| x * y).sum();
        }
    }
    out
}

/// SplitMix64 output function.
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `index` in a study seeded with `seed`.
pub fn replicate_seed(seed: u64, index: u64) -> u64 {
    splitmix64_mix(seed ^ splitmix64_mix(index))
}

pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replicate_seed(seed, index))
}

/// Runs `reps` independent replicates of the exchangeability test on data
/// drawn from the configured correlation matrix.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    if config.reps == 0 {
        return Err(Error::InvalidConfig("reps must be at least 1".into()));
    }
    if config
        .alpha_levels
        .iter()
        .any(|a| !(*a > 0.0 && *a < 1.0))
    {
        return Err(Error::InvalidConfig("alpha levels must lie in (0, 1)".into()));
    }
    let corr = build_correlation(&config.spec)?;
    let l = sampling_factor(&corr, config.factorization)?;

    let replicates = (0..config.reps)
        .into_par_iter()
        .map(|index| {
            let mut rng = replicate_rng(config.seed, index as u64);
            let data = sample_gaussian(&l, config.n, &mut rng);
            match run_exch_test(&data) {
                Ok(r) => Ok(ReplicateOutcome {
                    index,
                    p_value: Some(r.p_value),
                    statistic: Some(r.statistic),
                    status: ReplicateStatus::Ok,
                }),
                Err(e) if e.is_numerical() => Ok(ReplicateOutcome {
                    index,
                    p_value: None,
                    statistic: None,
                    status: ReplicateStatus::Degenerate,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let p_values: Vec<f64> = replicates.iter().filter_map(|r| r.p_value).collect();
    let failures = replicates.len() - p_values.len();
    let rejection_rates = config
        .alpha_levels
        .iter()
        .map(|&alpha| RejectionRate {
            alpha,
            rate: rejection_rate(&p_values, alpha),
        })
        .collect();
    Ok(StudyResult {
        config: config.clone(),
        replicates,
        rejection_rates,
        failures,
    })
}
