//! Brute-force reference implementations.
//!
//! Everything here evaluates the textbook definitions directly (double sums
//! over observation pairs, explicitly assembled covariance matrices, a dense
//! eigensolver) and shares no code path with the fast routines it is used to
//! check. Intended for tests and small instances only.

use std::cmp::Ordering;

use crate::kendall::{BivariateTauResult, SortedPairSample};
use crate::matrix::{jacobi_eigen, Matrix};
use crate::multivariate::{PairIndex, StructuredCov};
use crate::{Error, Result};

/// Per-observation concordant and discordant counts found by enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleCounts {
    pub c_per_obs: Vec<u64>,
    pub d_per_obs: Vec<u64>,
    pub c_total: u64,
    pub d_total: u64,
}

/// Concordance kernel `h = 2·1{(x_i - x_j)(y_i - y_j) > 0} - 1`.
fn kernel(xi: f64, yi: f64, xj: f64, yj: f64) -> Result<f64> {
    let prod = (xi - xj) * (yi - yj);
    match prod.partial_cmp(&0.0) {
        Some(Ordering::Greater) => Ok(1.0),
        Some(Ordering::Less) => Ok(-1.0),
        _ => Err(Error::TiesDetected { column: None }),
    }
}

/// `c_i` and `d_i` by direct enumeration of all pairs.
pub fn brute_force_counts(sample: &SortedPairSample) -> Result<OracleCounts> {
    let y = sample.y();
    let n = y.len();
    let mut c = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && kernel(i as f64, y[i], j as f64, y[j])? > 0.0 {
                c[i] += 1;
            }
        }
    }
    let d: Vec<u64> = c.iter().map(|&ci| (n as u64 - 1) - ci).collect();
    let c_total = c.iter().sum::<u64>() / 2;
    let d_total = d.iter().sum::<u64>() / 2;
    for i in 0..n {
        assert_eq!(c[i] + d[i], n as u64 - 1);
    }
    assert_eq!(c_total + d_total, (n * (n - 1) / 2) as u64);
    Ok(OracleCounts {
        c_per_obs: c,
        d_per_obs: d,
        c_total,
        d_total,
    })
}

/// `τ̂`, `ĝ_i` and `σ̂²` for arbitrary `(x, y)` straight from the kernel
/// averages: `ĝ_i = (n-1)⁻¹ Σ_{j≠i} h_ij - τ̂`.
pub fn brute_force_bivariate_xy(x: &[f64], y: &[f64]) -> Result<BivariateTauResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::DimensionTooSmall {
            what: "sample size",
            got: n,
            min: 2,
        });
    }
    let mut row_sums = vec![0.0; n];
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let h = kernel(x[i], y[i], x[j], y[j])?;
            row_sums[i] += h;
            row_sums[j] += h;
            total += h;
        }
    }
    let n_pairs = (n * (n - 1) / 2) as f64;
    let tau_hat = total / n_pairs;
    let g_hat: Vec<f64> = row_sums
        .iter()
        .map(|s| s / (n - 1) as f64 - tau_hat)
        .collect();
    let sigma2_hat = 4.0 / n as f64 * g_hat.iter().map(|g| g * g).sum::<f64>();
    Ok(BivariateTauResult {
        tau_hat,
        sigma2_hat,
        g_hat,
        n,
    })
}

/// Brute-force counterpart of `bivariate_jackknife` (x is the index order).
pub fn brute_force_bivariate(sample: &SortedPairSample) -> Result<BivariateTauResult> {
    let x: Vec<f64> = (0..sample.n()).map(|i| i as f64).collect();
    brute_force_bivariate_xy(&x, sample.y())
}

/// `τ̂` vector and `n × C(p,2)` pseudo-value matrix for a data matrix, pair by
/// pair, straight from the kernel double sums on the raw values.
pub fn brute_force_pairwise(data: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let (n, p) = (data.rows(), data.cols());
    let p2 = p * (p - 1) / 2;
    let mut tau = vec![0.0; p2];
    let mut g = Matrix::zeros(n, p2);
    for pair in PairIndex::all(p) {
        let r = brute_force_bivariate_xy(&data.column(pair.a), &data.column(pair.b))
            .map_err(|e| match e {
                Error::TiesDetected { .. } => Error::TiesDetected {
                    column: Some(pair.a),
                },
                e => e,
            })?;
        tau[pair.linear] = r.tau_hat;
        for i in 0..n {
            g[(i, pair.linear)] = r.g_hat[i];
        }
    }
    Ok((tau, g))
}

/// `(4/n) Σ_i ĝ_i ĝ_iᵀ` by an explicit triple loop over `(i, P, Q)`.
pub fn sigma_hat_direct(g: &Matrix) -> Matrix {
    let (n, p2) = (g.rows(), g.cols());
    let mut s = Matrix::zeros(p2, p2);
    for a in 0..p2 {
        for b in 0..p2 {
            let mut acc = 0.0;
            for i in 0..n {
                acc += g[(i, a)] * g[(i, b)];
            }
            s[(a, b)] = 4.0 * acc / n as f64;
        }
    }
    s
}

/// Overlap `|P ∩ Q|` of two variable pairs.
pub fn overlap(p: PairIndex, q: PairIndex) -> usize {
    [p.a, p.b]
        .iter()
        .filter(|&&v| v == q.a || v == q.b)
        .count()
}

/// Means of the entries of a dense `Σ̂` grouped by pair overlap 0, 1, 2.
pub fn naive_structured_sigma(sigma: &Matrix, p: usize) -> StructuredCov {
    let pairs: Vec<PairIndex> = PairIndex::all(p).collect();
    let mut sums = [0.0; 3];
    let mut counts = [0usize; 3];
    for &pp in &pairs {
        for &qq in &pairs {
            let k = overlap(pp, qq);
            sums[k] += sigma[(pp.linear, qq.linear)];
            counts[k] += 1;
        }
    }
    StructuredCov {
        sigma0: sums[0] / counts[0] as f64,
        sigma1: sums[1] / counts[1] as f64,
        sigma2: sums[2] / counts[2] as f64,
    }
}

/// The `C(p,2) × C(p,2)` matrix holding `σ_k` where the pairs overlap in `k`
/// variables.
pub fn dense_structured_matrix(sigma: &StructuredCov, p: usize) -> Matrix {
    let pairs: Vec<PairIndex> = PairIndex::all(p).collect();
    let values = [sigma.sigma0, sigma.sigma1, sigma.sigma2];
    let mut m = Matrix::zeros(pairs.len(), pairs.len());
    for &pp in &pairs {
        for &qq in &pairs {
            m[(pp.linear, qq.linear)] = values[overlap(pp, qq)];
        }
    }
    m
}

/// `yᵀ Σ̄⁻¹ y` with `Σ̄` assembled explicitly from `(σ₀, σ₁, σ₂)` and inverted
/// through its eigendecomposition.
pub fn dense_structured_whitening(sigma: &StructuredCov, p: usize, y: &[f64]) -> Result<f64> {
    let p2 = p * (p - 1) / 2;
    if y.len() != p2 {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: p2,
        });
    }
    let m = dense_structured_matrix(sigma, p);
    let (vals, vecs) = jacobi_eigen(&m);
    let largest = vals.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut q = 0.0;
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda <= 1e-12 * largest || largest <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                index: k,
                pivot: lambda,
            });
        }
        let proj: f64 = (0..p2).map(|r| vecs[(r, k)] * y[r]).sum();
        q += proj * proj / lambda;
    }
    Ok(q)
}
