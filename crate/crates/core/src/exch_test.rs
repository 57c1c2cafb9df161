//! Chi-square test of full exchangeability based on the `τ̂` vector.
//!
//! Under full exchangeability the covariance of `√n τ̂` only takes the values
//! `σ₀, σ₁, σ₂` according to pair overlap. Such a matrix is a combination of
//! the identity and the adjacency matrices of the triangular graph, so it
//! shares their eigenspaces: the constant vector, the `(p-1)`-dimensional
//! space spanned by `{s_a + s_b : Σ s = 0}`, and its `p(p-3)/2`-dimensional
//! complement. A centered vector is whitened by projecting on the latter two.

use serde::Serialize;

use crate::chisq::chi_square_sf;
use crate::multivariate::{
    mean_tau, pairwise_jackknife, structured_sigma, PairIndex, StructuredCov, TauVector,
};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExchTestResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Whitening eigenvalues `(λ₁, λ₂)`.
    pub eigenvalues: (f64, f64),
    pub n: usize,
    pub p: usize,
}

/// Eigenvalues of the structured matrix on the two non-constant eigenspaces,
/// of multiplicity `p - 1` and `p(p-3)/2` respectively.
pub fn whitening_eigenvalues(sigma: &StructuredCov, p: usize) -> (f64, f64) {
    let p = p as f64;
    let l1 = sigma.sigma2 + (p - 4.0) * sigma.sigma1 - (p - 3.0) * sigma.sigma0;
    let l2 = sigma.sigma2 - 2.0 * sigma.sigma1 + sigma.sigma0;
    (l1, l2)
}

/// Splits a vector orthogonal to the constant vector into its components
/// `(u, w)` in the `(p-1)`- and `p(p-3)/2`-dimensional eigenspaces.
pub fn spectral_split(y: &[f64], p: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(p >= 3, "need p >= 3");
    assert_eq!(y.len(), PairIndex::count(p));
    let mut m = vec![0.0; p];
    for (pair, &v) in PairIndex::all(p).zip(y) {
        m[pair.a] += v;
        m[pair.b] += v;
    }
    let denom = (p - 2) as f64;
    let u: Vec<f64> = PairIndex::all(p)
        .map(|pair| (m[pair.a] + m[pair.b]) / denom)
        .collect();
    let w = y.iter().zip(&u).map(|(a, b)| a - b).collect();
    (u, w)
}

/// `yᵀ Σ̄⁻¹ y` for `y ⟂ 1`, without forming `Σ̄`.
pub fn whitened_norm(y: &[f64], sigma: &StructuredCov, p: usize) -> Result<(f64, (f64, f64))> {
    let (l1, l2) = whitening_eigenvalues(sigma, p);
    let scale = l1.abs().max(l2.abs());
    for (index, value) in [(1, l1), (2, l2)] {
        if !(value > 1e-12 * scale) {
            return Err(Error::NonPositiveEigenvalue { value, index });
        }
    }
    let (u, w) = spectral_split(y, p);
    let nu: f64 = u.iter().map(|v| v * v).sum();
    let nw: f64 = w.iter().map(|v| v * v).sum();
    Ok((nu / l1 + nw / l2, (l1, l2)))
}

/// `E = ‖Σ̄^{-1/2} √n (τ̂ - τ̄)‖²` and its chi-square p-value on
/// `C(p,2) - 1` degrees of freedom.
pub fn exch_statistic(
    tau: &TauVector,
    sigma: &StructuredCov,
    n: usize,
    p: usize,
) -> Result<ExchTestResult> {
    if p < 4 {
        return Err(Error::DimensionTooSmall {
            what: "dimension",
            got: p,
            min: 4,
        });
    }
    let p2 = PairIndex::count(p);
    if tau.values.len() != p2 {
        return Err(Error::LengthMismatch {
            left: tau.values.len(),
            right: p2,
        });
    }
    let center = mean_tau(tau);
    let root_n = (n as f64).sqrt();
    let y: Vec<f64> = tau.values.iter().map(|t| root_n * (t - center)).collect();
    let (statistic, eigenvalues) = whitened_norm(&y, sigma, p)?;
    let dof = p2 - 1;
    let p_value = chi_square_sf(statistic, dof)?;
    Ok(ExchTestResult {
        statistic,
        dof,
        p_value,
        eigenvalues,
        n,
        p,
    })
}

/// Full test on an `n × p` data matrix.
pub fn run_exch_test(data: &Matrix) -> Result<ExchTestResult> {
    if data.cols() < 4 {
        return Err(Error::DimensionTooSmall {
            what: "dimension",
            got: data.cols(),
            min: 4,
        });
    }
    let (tau, g) = pairwise_jackknife(data)?;
    let sigma = structured_sigma(&g)?;
    exch_statistic(&tau, &sigma, data.rows(), data.cols())
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDENTITY: StructuredCov = StructuredCov {
        sigma0: 0.0,
        sigma1: 0.0,
        sigma2: 1.0,
    };

    #[test]
    fn equal_taus_give_zero_statistic() {
        let tau = TauVector {
            values: vec![0.5; 10],
            p: 5,
        };
        let sigma = StructuredCov {
            sigma0: 0.05,
            sigma1: 0.1,
            sigma2: 0.4,
        };
        let r = exch_statistic(&tau, &sigma, 100, 5).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.dof, 9);

        // 0.3 is not exact in binary; the mean only matches up to rounding.
        let tau = TauVector {
            values: vec![0.3; 10],
            p: 5,
        };
        let r = exch_statistic(&tau, &sigma, 100, 5).unwrap();
        assert!(r.statistic < 1e-20);
        assert!(r.p_value > 1.0 - 1e-12);
    }

    #[test]
    fn identity_whitening() {
        let values = vec![0.1, 0.2, -0.3, 0.05, 0.0, 0.4];
        let mean = values.iter().sum::<f64>() / 6.0;
        let want: f64 = 50.0 * values.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>();
        let tau = TauVector { values, p: 4 };
        let r = exch_statistic(&tau, &IDENTITY, 50, 4).unwrap();
        assert!((r.statistic - want).abs() < 1e-12 * want);
        assert_eq!(r.eigenvalues, (1.0, 1.0));
    }

    #[test]
    fn degenerate_sigma_is_an_error() {
        let tau = TauVector {
            values: vec![0.1, 0.2, -0.3, 0.05, 0.0, 0.4],
            p: 4,
        };
        let zero = StructuredCov {
            sigma0: 0.0,
            sigma1: 0.0,
            sigma2: 0.0,
        };
        assert!(matches!(
            exch_statistic(&tau, &zero, 10, 4),
            Err(Error::NonPositiveEigenvalue { .. })
        ));
        assert!(matches!(
            exch_statistic(&tau, &IDENTITY, 10, 3),
            Err(Error::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn comonotone_columns_are_degenerate() {
        let rows: Vec<[f64; 4]> = (0..30)
            .map(|i| {
                let t = i as f64;
                [t, 2.0 * t, t * t, t.sqrt()]
            })
            .collect();
        assert!(matches!(
            run_exch_test(&Matrix::from_rows(&rows)),
            Err(Error::NonPositiveEigenvalue { .. })
        ));
    }

    #[test]
    fn split_is_orthogonal() {
        let p = 6;
        let raw: Vec<f64> = (0..15).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let mean = raw.iter().sum::<f64>() / 15.0;
        let y: Vec<f64> = raw.iter().map(|v| v - mean).collect();
        let (u, w) = spectral_split(&y, p);
        let dot: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
        let ny: f64 = y.iter().map(|v| v * v).sum();
        let nu: f64 = u.iter().map(|v| v * v).sum();
        let nw: f64 = w.iter().map(|v| v * v).sum();
        assert!(dot.abs() < 1e-10 * ny);
        assert!((nu + nw - ny).abs() < 1e-10 * ny);
    }
}
