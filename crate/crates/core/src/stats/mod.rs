//! Stylized-fact battery for log returns: heavy tails, normality,
//! autocorrelation and volatility clustering.

mod ks;
mod ljung_box;
mod shapiro;

use serde::{Deserialize, Serialize};

pub use ks::{kolmogorov_sf, ks_normality_test, ks_one_sample, lilliefors_p_value};
pub use ljung_box::{autocorrelations, ljung_box_test};
pub use shapiro::{sw_normality_test, SW_MAX_N, SW_MIN_N};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const REPORT_LAGS: [usize; 3] = [5, 10, 15];
pub const MIN_REPORT_OBS: usize = 30;

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
}

impl TestOutcome {
    pub(crate) fn new(statistic: f64, p_value: f64, alpha: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            statistic,
            p_value,
            reject: p_value < alpha,
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population (divide-by-n) variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
}

/// Unbiased (divide-by-n−1) standard deviation.
pub fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    (variance(xs) * n / (n - 1.0)).sqrt()
}

/// Fourth standardized moment `m₄/m₂²` (normal → 3).
pub fn sample_kurtosis(xs: &[f64]) -> Result<f64> {
    if xs.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: xs.len(),
        });
    }
    let m = mean(xs);
    let (m2, m4) = xs.iter().fold((0.0, 0.0), |(a, b), x| {
        let d = (x - m).powi(2);
        (a + d, b + d * d)
    });
    let n = xs.len() as f64;
    let (m2, m4) = (m2 / n, m4 / n);
    if m2 == 0.0 {
        return Err(Error::ZeroVariance("kurtosis of a constant sample"));
    }
    Ok(m4 / (m2 * m2))
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(&sorted(xs), 0.5)
}

pub(crate) fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Raw,
    Abs,
    Square,
}

impl Transform {
    pub const ALL: [Transform; 3] = [Transform::Raw, Transform::Abs, Transform::Square];

    pub fn apply(&self, xs: &[f64]) -> Vec<f64> {
        match self {
            Transform::Raw => xs.to_vec(),
            Transform::Abs => xs.iter().map(|x| x.abs()).collect(),
            Transform::Square => xs.iter().map(|x| x * x).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxRow {
    pub lags: usize,
    pub transform: Transform,
    pub q: f64,
    pub p_value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StylizedFactsReport {
    pub n_obs: usize,
    pub alpha: f64,
    pub kurtosis: f64,
    pub heavy_tails: bool,
    pub ks: TestOutcome,
    /// `None` when the sample size is outside the Shapiro–Wilk range.
    pub sw: Option<TestOutcome>,
    pub ljung_box: Vec<LjungBoxRow>,
    pub autocorrelation: bool,
    pub volatility_clustering: bool,
}

impl StylizedFactsReport {
    pub fn ljung_box_at(&self, lags: usize, transform: Transform) -> Option<&LjungBoxRow> {
        self.ljung_box
            .iter()
            .find(|r| r.lags == lags && r.transform == transform)
    }

    /// `(metric, value)` rows in the order of the stylized-facts table.
    pub fn rows(&self) -> Vec<(String, String)> {
        let mut rows = vec![
            ("n_obs".to_string(), self.n_obs.to_string()),
            ("ks_reject".into(), self.ks.reject.to_string()),
            ("ks_p_value".into(), self.ks.p_value.to_string()),
            (
                "sw_reject".into(),
                self.sw.map_or("na".into(), |t| t.reject.to_string()),
            ),
            (
                "sw_p_value".into(),
                self.sw.map_or("na".into(), |t| t.p_value.to_string()),
            ),
            ("heavy_tails".into(), self.heavy_tails.to_string()),
            ("kurtosis".into(), self.kurtosis.to_string()),
        ];
        for row in &self.ljung_box {
            let suffix = match row.transform {
                Transform::Raw => String::new(),
                Transform::Abs => "_abs".into(),
                Transform::Square => "_square".into(),
            };
            rows.push((format!("ljung_box_lag{}{}_reject", row.lags, suffix), row.reject.to_string()));
            rows.push((format!("ljung_box_lag{}{}_p_value", row.lags, suffix), row.p_value.to_string()));
        }
        rows.push(("autocorrelation".into(), self.autocorrelation.to_string()));
        rows.push(("volatility_clustering".into(), self.volatility_clustering.to_string()));
        rows
    }
}

/// Runs the full battery at significance `alpha`.
pub fn build_report(returns: &[f64], alpha: f64) -> Result<StylizedFactsReport> {
    let n = returns.len();
    if n < MIN_REPORT_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_REPORT_OBS,
            got: n,
        });
    }
    let kurtosis = sample_kurtosis(returns)?;
    let ks = ks_normality_test(returns, alpha)?;
    let sw = if (SW_MIN_N..=SW_MAX_N).contains(&n) {
        Some(sw_normality_test(returns, alpha)?)
    } else {
        None
    };
    let mut ljung_box = Vec::new();
    for transform in Transform::ALL {
        let series = transform.apply(returns);
        for lags in REPORT_LAGS {
            let t = ljung_box_test(&series, lags, alpha)?;
            ljung_box.push(LjungBoxRow {
                lags,
                transform,
                q: t.statistic,
                p_value: t.p_value,
                reject: t.reject,
            });
        }
    }
    let autocorrelation = ljung_box
        .iter()
        .any(|r| r.transform == Transform::Raw && r.reject);
    let volatility_clustering = ljung_box
        .iter()
        .any(|r| r.transform != Transform::Raw && r.reject);
    Ok(StylizedFactsReport {
        n_obs: n,
        alpha,
        kurtosis,
        heavy_tails: kurtosis > 3.0,
        ks,
        sw,
        ljung_box,
        autocorrelation,
        volatility_clustering,
    })
}


#[cfg(test)]
mod tests {
    use super::tests_support::gaussian;
    use super::*;
    use crate::rng::RngSpec;
    use rand::Rng;
    use rand_distr::{Distribution, Exp1};

    #[test]
    fn kurtosis_reference_samples() {
        let k = sample_kurtosis(&gaussian(100_000, 1)).unwrap();
        assert!((k - 3.0).abs() < 0.1, "{k}");

        let two_point: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        assert!((sample_kurtosis(&two_point).unwrap() - 1.0).abs() < 1e-12);

        let mut g = RngSpec::new(2, 0).generator();
        let laplace: Vec<f64> = (0..100_000)
            .map(|_| {
                let e: f64 = Exp1.sample(&mut g);
                if g.random::<bool>() {
                    e
                } else {
                    -e
                }
            })
            .collect();
        let k = sample_kurtosis(&laplace).unwrap();
        assert!((k - 6.0).abs() < 0.3, "{k}");

        assert!(sample_kurtosis(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn quantile_interpolates() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&s, 0.0), 1.0);
        assert_eq!(quantile(&s, 1.0), 4.0);
        assert_eq!(quantile(&s, 0.5), 2.5);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn report_shape_and_errors() {
        let r = build_report(&gaussian(500, 3), DEFAULT_ALPHA).unwrap();
        assert_eq!(r.ljung_box.len(), 9);
        assert!(r.sw.is_some());
        assert!(r.ljung_box.iter().all(|row| (0.0..=1.0).contains(&row.p_value) && row.q >= 0.0));
        assert!(r.rows().iter().any(|(k, _)| k == "ljung_box_lag15_square_reject"));
        assert!(matches!(
            build_report(&gaussian(10, 3), DEFAULT_ALPHA),
            Err(Error::InsufficientData { .. })
        ));
        let again = build_report(&gaussian(500, 3), DEFAULT_ALPHA).unwrap();
        assert_eq!(r, again);
    }
}
