use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{mean, TestOutcome};
use crate::error::{Error, Result};

/// Sample autocorrelations ρ̂₁..ρ̂_lags (biased, divide-by-n estimator).
pub fn autocorrelations(xs: &[f64], lags: usize) -> Result<Vec<f64>> {
    let n = xs.len();
    if n <= lags + 1 {
        return Err(Error::InsufficientData {
            needed: lags + 2,
            got: n,
        });
    }
    let m = mean(xs);
    let d: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let c0: f64 = d.iter().map(|v| v * v).sum();
    if c0 <= 0.0 || !c0.is_finite() {
        return Err(Error::ZeroVariance("autocorrelation of a constant series"));
    }
    Ok((1..=lags)
        .map(|k| d[k..].iter().zip(&d[..n - k]).map(|(a, b)| a * b).sum::<f64>() / c0)
        .collect())
}

/// Ljung–Box portmanteau test of no autocorrelation up to `lags`.
pub fn ljung_box_test(xs: &[f64], lags: usize, alpha: f64) -> Result<TestOutcome> {
    if lags == 0 {
        return Err(Error::param("lags", "must be at least 1"));
    }
    let rho = autocorrelations(xs, lags)?;
    let n = xs.len() as f64;
    let q = n
        * (n + 2.0)
        * rho
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (n - (i + 1) as f64))
            .sum::<f64>();
    let chi = ChiSquared::new(lags as f64).expect("positive degrees of freedom");
    Ok(TestOutcome::new(q, chi.sf(q), alpha))
}
