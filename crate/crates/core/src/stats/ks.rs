use super::{mean, sample_std, sorted, TestOutcome};
use crate::error::{Error, Result};
use crate::special::norm_cdf;

pub const KS_MIN_N: usize = 8;

/// Two-sided sup distance between the empirical CDF of `xs` and `cdf`.
fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let s = sorted(xs);
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    })
}

/// Upper tail of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test against a fully specified CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64, alpha: f64) -> Result<TestOutcome> {
    if xs.len() < KS_MIN_N {
        return Err(Error::InsufficientData {
            needed: KS_MIN_N,
            got: xs.len(),
        });
    }
    let d = ks_distance(xs, cdf);
    let sn = (xs.len() as f64).sqrt();
    let p = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
    Ok(TestOutcome::new(d, p, alpha))
}

/// p-value of the KS distance when mean and variance are estimated from
/// the same sample (Dallal–Wilkinson approximation).
pub fn lilliefors_p_value(d: f64, n: usize) -> f64 {
    let nf = n as f64;
    let (kd, nd) = if n <= 100 {
        (d, nf)
    } else {
        (d * (nf / 100.0).powf(0.49), 100.0)
    };
    let mut p = (-7.01256 * kd * kd * (nd + 2.78019)
        + 2.99587 * kd * (nd + 2.78019).sqrt()
        - 0.122119
        + 0.974598 / nd.sqrt()
        + 1.67997 / nd)
        .exp();
    if p > 0.1 {
        let kk = (nf.sqrt() - 0.01 + 0.85 / nf.sqrt()) * d;
        p = if kk <= 0.302 {
            1.0
        } else if kk <= 0.5 {
            2.76773 - 19.828315 * kk + 80.709644 * kk.powi(2) - 138.55152 * kk.powi(3)
                + 81.218052 * kk.powi(4)
        } else if kk <= 0.9 {
            -4.901232 + 40.662806 * kk - 97.490286 * kk.powi(2) + 94.029866 * kk.powi(3)
                - 32.355711 * kk.powi(4)
        } else if kk <= 1.31 {
            6.198765 - 19.558097 * kk + 23.186922 * kk.powi(2) - 12.234627 * kk.powi(3)
                + 2.423045 * kk.powi(4)
        } else {
            0.0
        };
    }
    p.clamp(0.0, 1.0)
}

/// KS distance to Normal(sample mean, sample sd). The p-value accounts for
/// the estimated parameters.
pub fn ks_normality_test(xs: &[f64], alpha: f64) -> Result<TestOutcome> {
    if xs.len() < KS_MIN_N {
        return Err(Error::InsufficientData {
            needed: KS_MIN_N,
            got: xs.len(),
        });
    }
    let (m, s) = (mean(xs), sample_std(xs));
    if s == 0.0 {
        return Err(Error::ZeroVariance("KS test on a constant sample"));
    }
    let d = ks_distance(xs, |x| norm_cdf((x - m) / s));
    Ok(TestOutcome::new(d, lilliefors_p_value(d, xs.len()), alpha))
}
