//! Swap-count-augmented merge sort and the bivariate estimators built on it.
//!
//! With the `x` coordinates already in increasing order, the discordant pairs
//! are exactly the inversions of `y`. Exchange sort removes one inversion per
//! adjacent swap, and the number of swaps an element takes part in is the
//! number of discordant pairs it belongs to. Merge sort reaches the same final
//! order in `O(n log n)` while crediting each element with the swaps exchange
//! sort would have made, so the per-observation counts `d_i` come for free.

use std::cmp::Ordering;

use serde::Serialize;

use crate::{Error, Result};

/// Blocks shorter than this are sorted by insertion sort.
pub const DEFAULT_INSERTION_CUTOFF: usize = 10;

/// `n` observations of `y`, listed in increasing order of their paired `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedPairSample {
    y: Vec<f64>,
}

impl SortedPairSample {
    /// Validates `n ≥ 2`, finiteness and pairwise distinctness of `y`.
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.len() < 2 {
            return Err(Error::DimensionTooSmall {
                what: "sample size",
                got: y.len(),
                min: 2,
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainError("non-finite value in y".into()));
        }
        let mut sorted = y.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::TiesDetected { column: None });
        }
        Ok(Self { y })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

/// Per-observation discordance counts `d_i` (indexed by position in x-order)
/// and their total `d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SwapCounts {
    pub d_per_obs: Vec<u64>,
    pub d_total: u64,
}

impl SwapCounts {
    pub fn n(&self) -> usize {
        self.d_per_obs.len()
    }

    /// Number of pairs, `C(n, 2)`.
    pub fn n_pairs(&self) -> u64 {
        let n = self.n() as u64;
        n * (n - 1) / 2
    }

    /// `c_i = n - 1 - d_i`.
    pub fn concordant_per_obs(&self) -> Vec<u64> {
        let last = self.n() as u64 - 1;
        self.d_per_obs.iter().map(|&d| last - d).collect()
    }

    /// `c = C(n, 2) - d`.
    pub fn concordant_total(&self) -> u64 {
        self.n_pairs() - self.d_total
    }
}

/// `τ̂`, the jackknife variance `σ̂²` and the pseudo-values `ĝ_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BivariateTauResult {
    pub tau_hat: f64,
    pub sigma2_hat: f64,
    pub g_hat: Vec<f64>,
    pub n: usize,
}

#[inline]
fn strictly_less<T: PartialOrd>(a: &T, b: &T) -> Result<bool> {
    match a.partial_cmp(b) {
        Some(Ordering::Less) => Ok(true),
        Some(Ordering::Greater) => Ok(false),
        _ => Err(Error::TiesDetected { column: None }),
    }
}

/// Insertion sort of a short block, crediting every element with the number of
/// adjacent exchanges it takes part in.
///
/// `ids[k]` is the original index of `y[k]`; `d` is indexed by original index
/// and must cover every id. On error the block is left partially sorted.
pub fn insertion_sort_with_counts<T: PartialOrd + Copy>(
    y: &mut [T],
    ids: &mut [usize],
    d: &mut [u64],
) -> Result<()> {
    let m = y.len();
    if ids.len() != m {
        return Err(Error::LengthMismatch {
            left: m,
            right: ids.len(),
        });
    }
    if m < 2 {
        return Ok(());
    }
    for i in (0..m - 1).rev() {
        let z = y[i];
        let id = ids[i];
        let mut j = i;
        while j + 1 < m && strictly_less(&y[j + 1], &z)? {
            y[j] = y[j + 1];
            ids[j] = ids[j + 1];
            d[ids[j]] += 1;
            j += 1;
        }
        y[j] = z;
        ids[j] = id;
        d[id] += (j - i) as u64;
    }
    Ok(())
}

/// Merges the sorted halves `src[..mid]` and `src[mid..]` into `dst`.
///
/// A right-half element emitted while `k` left-half elements remain jumps over
/// all `k` of them; a left-half element emitted after `j` right-half elements
/// has been jumped over `j` times.
fn merge_into<T: PartialOrd + Copy>(
    src_y: &[T],
    src_ids: &[usize],
    dst_y: &mut [T],
    dst_ids: &mut [usize],
    d: &mut [u64],
) -> Result<()> {
    let m = src_y.len();
    let mid = m / 2;
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < m {
        if strictly_less(&src_y[j], &src_y[i])? {
            dst_y[k] = src_y[j];
            dst_ids[k] = src_ids[j];
            d[src_ids[j]] += (mid - i) as u64;
            j += 1;
        } else {
            dst_y[k] = src_y[i];
            dst_ids[k] = src_ids[i];
            d[src_ids[i]] += (j - mid) as u64;
            i += 1;
        }
        k += 1;
    }
    if i < mid {
        let passed = (m - mid) as u64;
        for r in i..mid {
            d[src_ids[r]] += passed;
        }
        dst_y[k..].copy_from_slice(&src_y[i..mid]);
        dst_ids[k..].copy_from_slice(&src_ids[i..mid]);
    } else {
        dst_y[k..].copy_from_slice(&src_y[j..]);
        dst_ids[k..].copy_from_slice(&src_ids[j..]);
    }
    Ok(())
}

/// One merge step on `y`, whose halves `y[..m/2]` and `y[m/2..]` are each
/// already ascending. `ids` moves in lockstep; `d` is indexed by id.
pub fn merge_step_with_counts<T: PartialOrd + Copy>(
    y: &mut [T],
    ids: &mut [usize],
    d: &mut [u64],
) -> Result<()> {
    if ids.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: ids.len(),
        });
    }
    if y.len() < 2 {
        return Ok(());
    }
    let mut out_y = y.to_vec();
    let mut out_ids = ids.to_vec();
    merge_into(y, ids, &mut out_y, &mut out_ids, d)?;
    y.copy_from_slice(&out_y);
    ids.copy_from_slice(&out_ids);
    Ok(())
}

fn merge_sort<T: PartialOrd + Copy>(
    y: &mut [T],
    y_buf: &mut [T],
    ids: &mut [usize],
    ids_buf: &mut [usize],
    d: &mut [u64],
    cutoff: usize,
) -> Result<()> {
    let m = y.len();
    if m < cutoff {
        return insertion_sort_with_counts(y, ids, d);
    }
    let mid = m / 2;
    {
        let (yl, yr) = y.split_at_mut(mid);
        let (ybl, ybr) = y_buf.split_at_mut(mid);
        let (il, ir) = ids.split_at_mut(mid);
        let (ibl, ibr) = ids_buf.split_at_mut(mid);
        merge_sort(yl, ybl, il, ibl, d, cutoff)?;
        merge_sort(yr, ybr, ir, ibr, d, cutoff)?;
    }
    merge_into(y, ids, y_buf, ids_buf, d)?;
    y.copy_from_slice(y_buf);
    ids.copy_from_slice(ids_buf);
    Ok(())
}

/// Swap counts of an arbitrary sequence of distinct, totally comparable values.
pub fn swap_counts_of<T: PartialOrd + Copy>(y: &[T]) -> Result<SwapCounts> {
    swap_counts_with_cutoff(y, DEFAULT_INSERTION_CUTOFF)
}

/// As [`swap_counts_of`] with an explicit insertion-sort cutoff (`≥ 2`).
pub fn swap_counts_with_cutoff<T: PartialOrd + Copy>(y: &[T], cutoff: usize) -> Result<SwapCounts> {
    if cutoff < 2 {
        return Err(Error::InvalidConfig(format!(
            "insertion cutoff must be at least 2, got {cutoff}"
        )));
    }
    let n = y.len();
    let mut work = y.to_vec();
    let mut buf = work.clone();
    let mut ids: Vec<usize> = (0..n).collect();
    let mut ids_buf = ids.clone();
    let mut d = vec![0u64; n];
    merge_sort(&mut work, &mut buf, &mut ids, &mut ids_buf, &mut d, cutoff)?;
    let d_total = d.iter().sum::<u64>() / 2;
    Ok(SwapCounts {
        d_per_obs: d,
        d_total,
    })
}

/// Per-observation discordance counts of a sample in `O(n log n)`.
pub fn sort_with_swap_counts(sample: &SortedPairSample) -> Result<SwapCounts> {
    swap_counts_of(sample.y())
}

/// `τ̂`, `ĝ_i` and `σ̂²` from swap counts.
///
/// `τ̂ = (c - d) / C(n,2)` and `ĝ_i = 2{c_i/(n-1) - c/C(n,2)}`; the latter is
/// evaluated over a common integer denominator so only one rounding occurs.
pub fn jackknife_from_counts(counts: &SwapCounts) -> BivariateTauResult {
    let n = counts.n();
    assert!(n >= 2, "jackknife needs at least two observations");
    let n_pairs = counts.n_pairs() as i128;
    let c = counts.concordant_total() as i128;
    let d = counts.d_total as i128;
    let last = (n - 1) as i128;
    let denom = (last * n_pairs) as f64;

    let tau_hat = (c - d) as f64 / n_pairs as f64;
    let g_hat: Vec<f64> = counts
        .d_per_obs
        .iter()
        .map(|&di| {
            let ci = last - di as i128;
            (2 * (ci * n_pairs - c * last)) as f64 / denom
        })
        .collect();
    let sigma2_hat = 4.0 / n as f64 * g_hat.iter().map(|g| g * g).sum::<f64>();
    BivariateTauResult {
        tau_hat,
        sigma2_hat,
        g_hat,
        n,
    }
}

/// Kendall's `τ̂` and its jackknife variance for an x-ordered sample.
pub fn bivariate_jackknife(sample: &SortedPairSample) -> Result<BivariateTauResult> {
    sort_with_swap_counts(sample).map(|c| jackknife_from_counts(&c))
}

/// Indices that sort `x` ascending; fails on ties or non-finite values.
pub fn argsort_strict(x: &[f64]) -> Result<Vec<usize>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DomainError("non-finite value".into()));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_unstable_by(|&a, &b| x[a].total_cmp(&x[b]));
    if order.windows(2).any(|w| x[w[0]] == x[w[1]]) {
        return Err(Error::TiesDetected { column: None });
    }
    Ok(order)
}

/// Reorders `y` by increasing `x`, also returning the permutation used:
/// position `k` of the sample holds original row `order[k]`.
pub fn pair_from_xy_with_order(x: &[f64], y: &[f64]) -> Result<(SortedPairSample, Vec<usize>)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let order = argsort_strict(x).map_err(|e| e.with_column(0))?;
    let ys = order.iter().map(|&i| y[i]).collect();
    let sample = SortedPairSample::new(ys).map_err(|e| e.with_column(1))?;
    Ok((sample, order))
}

/// Jointly reorders `(x, y)` so that `x` is increasing.
pub fn pair_from_xy(x: &[f64], y: &[f64]) -> Result<SortedPairSample> {
    pair_from_xy_with_order(x, y).map(|(s, _)| s)
}
