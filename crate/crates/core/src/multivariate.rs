//! The `p`-variate extension: `τ̂` for every pair of columns, the jackknife
//! pseudo-value matrix, `Σ̂`, and the three-value structured covariance of a
//! fully exchangeable model.
//!
//! Pairs of variables are always listed in lexicographic order
//! `(0,1), (0,2), …, (0,p-1), (1,2), …, (p-2,p-1)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::kendall::{argsort_strict, jackknife_from_counts, swap_counts_of};
use crate::matrix::Matrix;
use crate::{Error, Result};

/// A pair of variables `a < b` (0-based) and its lexicographic position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PairIndex {
    pub a: usize,
    pub b: usize,
    pub linear: usize,
}

impl PairIndex {
    /// `C(p, 2)`.
    pub fn count(p: usize) -> usize {
        p * p.saturating_sub(1) / 2
    }

    pub fn new(a: usize, b: usize, p: usize) -> Option<Self> {
        (a < b && b < p).then(|| Self {
            a,
            b,
            linear: a * p - a * (a + 1) / 2 + (b - a - 1),
        })
    }

    pub fn from_linear(linear: usize, p: usize) -> Option<Self> {
        if linear >= Self::count(p) {
            return None;
        }
        let mut a = 0;
        let mut start = 0;
        while start + (p - a - 1) <= linear {
            start += p - a - 1;
            a += 1;
        }
        Self::new(a, a + 1 + (linear - start), p)
    }

    pub fn all(p: usize) -> impl Iterator<Item = PairIndex> {
        (0..p).flat_map(move |a| ((a + 1)..p).map(move |b| Self::new(a, b, p).unwrap()))
    }
}

/// `τ̂` for every pair, in lexicographic pair order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauVector {
    pub values: Vec<f64>,
    pub p: usize,
}

/// `n × C(p,2)` matrix whose row `i` is the pseudo-value vector `ĝ_i`,
/// rows in the original observation order.
#[derive(Debug, Clone, PartialEq)]
pub struct GInfluenceMatrix {
    pub values: Matrix,
    pub p: usize,
}

impl GInfluenceMatrix {
    pub fn n(&self) -> usize {
        self.values.rows()
    }
}

/// Covariances between `τ̂` entries whose pairs share 0, 1 or 2 variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructuredCov {
    pub sigma0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

fn ranks_of(col: &[f64], index: usize) -> Result<(Vec<usize>, Vec<u32>)> {
    let order = argsort_strict(col).map_err(|e| e.with_column(index))?;
    let mut ranks = vec![0u32; col.len()];
    for (k, &row) in order.iter().enumerate() {
        ranks[row] = k as u32;
    }
    Ok((order, ranks))
}

/// `τ̂` and pseudo-values for every pair of columns of `data` (`n × p`).
///
/// Each column is sorted once; pair `(a, b)` then runs the swap-count sort on
/// the ranks of `b` in the order of `a`. Pairs are processed in parallel and
/// the output does not depend on scheduling.
pub fn pairwise_jackknife(data: &Matrix) -> Result<(TauVector, GInfluenceMatrix)> {
    let (n, p) = (data.rows(), data.cols());
    if n < 2 {
        return Err(Error::DimensionTooSmall {
            what: "sample size",
            got: n,
            min: 2,
        });
    }
    if p < 2 {
        return Err(Error::DimensionTooSmall {
            what: "dimension",
            got: p,
            min: 2,
        });
    }
    if n > u32::MAX as usize {
        return Err(Error::DomainError(format!("sample size {n} exceeds u32 ranks")));
    }

    let columns = (0..p)
        .into_par_iter()
        .map(|j| ranks_of(&data.column(j), j))
        .collect::<Result<Vec<_>>>()?;

    let pairs: Vec<PairIndex> = PairIndex::all(p).collect();
    let per_pair: Vec<(f64, Vec<f64>)> = pairs
        .par_iter()
        .map(|pair| {
            let (order_a, _) = &columns[pair.a];
            let (_, ranks_b) = &columns[pair.b];
            let y: Vec<u32> = order_a.iter().map(|&row| ranks_b[row]).collect();
            let counts = swap_counts_of(&y).expect("ranks are distinct");
            let r = jackknife_from_counts(&counts);
            let mut g = vec![0.0; n];
            for (k, &row) in order_a.iter().enumerate() {
                g[row] = r.g_hat[k];
            }
            (r.tau_hat, g)
        })
        .collect();

    let p2 = pairs.len();
    let mut tau = Vec::with_capacity(p2);
    let mut g = Matrix::zeros(n, p2);
    for (col, (t, gcol)) in per_pair.into_iter().enumerate() {
        tau.push(t);
        for (i, v) in gcol.into_iter().enumerate() {
            g[(i, col)] = v;
        }
    }
    Ok((
        TauVector { values: tau, p },
        GInfluenceMatrix { values: g, p },
    ))
}

/// `Σ̂ = (4/n) Σ_i ĝ_i ĝ_iᵀ`.
pub fn sigma_hat_dense(g: &GInfluenceMatrix) -> Matrix {
    let (n, p2) = (g.values.rows(), g.values.cols());
    let mut s = Matrix::zeros(p2, p2);
    for i in 0..n {
        let row = g.values.row(i);
        for a in 0..p2 {
            let ga = row[a];
            if ga == 0.0 {
                continue;
            }
            for b in a..p2 {
                s[(a, b)] += ga * row[b];
            }
        }
    }
    let scale = 4.0 / n as f64;
    for a in 0..p2 {
        for b in a..p2 {
            let v = s[(a, b)] * scale;
            s[(a, b)] = v;
            s[(b, a)] = v;
        }
    }
    s
}

/// Averages of the `Σ̂` entries over the overlap classes `k = 0, 1, 2`,
/// accumulated observation by observation in `O(n p²)` without forming `Σ̂`.
///
/// For one `ĝ_i`, with `S = Σ_P ĝ_P²`, `r_a = Σ_{P∋a} ĝ_P` and
/// `T = (Σ_P ĝ_P)²`, the sums of `ĝ_P ĝ_Q` over ordered pairs `(P, Q)` are
/// `S` for `k = 2`, `Σ_a r_a² - 2S` for `k = 1` and `T - Σ_a r_a² + S` for
/// `k = 0`.
pub fn structured_sigma(g: &GInfluenceMatrix) -> Result<StructuredCov> {
    let p = g.p;
    if p < 4 {
        return Err(Error::DimensionTooSmall {
            what: "dimension",
            got: p,
            min: 4,
        });
    }
    let n = g.n();
    if n < 2 {
        return Err(Error::DimensionTooSmall {
            what: "sample size",
            got: n,
            min: 2,
        });
    }
    let pairs: Vec<PairIndex> = PairIndex::all(p).collect();
    let mut class = [0.0f64; 3];
    let mut r = vec![0.0; p];
    for i in 0..n {
        let row = g.values.row(i);
        r.iter_mut().for_each(|v| *v = 0.0);
        let mut s2 = 0.0;
        let mut total = 0.0;
        for (pair, &v) in pairs.iter().zip(row) {
            s2 += v * v;
            total += v;
            r[pair.a] += v;
            r[pair.b] += v;
        }
        let r2: f64 = r.iter().map(|v| v * v).sum();
        class[2] += s2;
        class[1] += r2 - 2.0 * s2;
        class[0] += total * total - r2 + s2;
    }

    let p2 = pairs.len() as f64;
    let size2 = p2;
    let size1 = 2.0 * p2 * (p - 2) as f64;
    let size0 = p2 * (p2 - 1.0) - size1;
    let scale = 4.0 / n as f64;
    Ok(StructuredCov {
        sigma0: scale * class[0] / size0,
        sigma1: scale * class[1] / size1,
        sigma2: scale * class[2] / size2,
    })
}

/// Average of the entries of `τ̂`.
pub fn mean_tau(t: &TauVector) -> f64 {
    if t.values.is_empty() {
        return 0.0;
    }
    t.values.iter().sum::<f64>() / t.values.len() as f64
}
