//! Kendall's tau and its jackknife variance in `O(n log n)`.
//!
//! The merge sort used to count inversions (discordant pairs) is augmented to
//! record, for every observation, how many times it would be swapped by an
//! exchange sort. Those per-observation counts are exactly the numbers of
//! discordant pairs each observation takes part in, which is all that is needed
//! for the jackknife pseudo-values `ĝ_i` and hence for `σ̂²`.
//!
//! On top of the bivariate routine the crate provides the `p`-variate
//! extension (`τ̂` vector, `Σ̂`, and the three-value structured covariance of an
//! exchangeable model), a chi-square test of full exchangeability, seeded
//! Gaussian simulation studies, and O(n²) brute-force oracles.

pub mod chisq;
mod error;
pub mod exch_test;
pub mod kendall;
pub mod matrix;
pub mod multivariate;
pub mod oracle;
pub mod simulate;

pub use error::{Error, Result};
pub use exch_test::{exch_statistic, run_exch_test, ExchTestResult};
pub use kendall::{
    bivariate_jackknife, pair_from_xy, sort_with_swap_counts, BivariateTauResult,
    SortedPairSample, SwapCounts,
};
pub use matrix::Matrix;
pub use multivariate::{
    mean_tau, pairwise_jackknife, sigma_hat_dense, structured_sigma, GInfluenceMatrix, PairIndex,
    StructuredCov, TauVector,
};
