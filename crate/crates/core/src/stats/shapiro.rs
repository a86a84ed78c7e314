use super::{mean, sorted, TestOutcome};
use crate::error::{Error, Result};
use crate::special::{norm_ppf, norm_sf};

pub const SW_MIN_N: usize = 12;
pub const SW_MAX_N: usize = 5000;

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

/// Royston's approximation of the half-vector of Shapiro–Wilk weights
/// (positive, largest first).
fn weights(n: usize) -> Vec<f64> {
    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    let half = n / 2;
    let nf = n as f64;
    let m: Vec<f64> = (1..=half)
        .map(|i| -norm_ppf((i as f64 - 0.375) / (nf + 0.25)))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / nf.sqrt();
    let a1 = m[0] / ssumm2 + poly(&C1, rsn);
    let a2 = m[1] / ssumm2 + poly(&C2, rsn);
    let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
        / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
        .sqrt();
    let mut a: Vec<f64> = m.iter().map(|v| v / fac).collect();
    a[0] = a1;
    a[1] = a2;
    a
}

/// Shapiro–Wilk W with Royston's normalizing transform for the p-value.
pub fn sw_normality_test(xs: &[f64], alpha: f64) -> Result<TestOutcome> {
    let n = xs.len();
    if !(SW_MIN_N..=SW_MAX_N).contains(&n) {
        return Err(Error::SampleSizeOutOfRange {
            min: SW_MIN_N,
            max: SW_MAX_N,
            got: n,
        });
    }
    let x = sorted(xs);
    let m = mean(&x);
    let ss: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    if ss == 0.0 {
        return Err(Error::ZeroVariance("Shapiro-Wilk test on a constant sample"));
    }
    let a = weights(n);
    let b: f64 = a
        .iter()
        .enumerate()
        .map(|(i, ai)| ai * (x[n - 1 - i] - x[i]))
        .sum();
    let w = (b * b / ss).min(1.0);

    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
    let ln_n = (n as f64).ln();
    let mu = poly(&C5, ln_n);
    let sd = poly(&C6, ln_n).exp();
    let p = if w >= 1.0 {
        1.0
    } else {
        norm_sf(((1.0 - w).ln() - mu) / sd)
    };
    Ok(TestOutcome::new(w, p, alpha))
}

#[cfg(test)]
mod tests {
    use super::super::tests_support::gaussian;
    use super::*;

    #[test]
    fn matches_reference_implementation() {
        // scipy.stats.shapiro on fixed samples
        let x: Vec<f64> = (1..=20).map(|i| (i as f64).powf(1.5)).collect();
        let t = sw_normality_test(&x, 0.05).unwrap();
        assert!((t.statistic - SW_POWER_W).abs() < 1e-6, "{}", t.statistic);
        assert!((t.p_value - SW_POWER_P).abs() < 1e-5, "{}", t.p_value);

        let y: Vec<f64> = (0..100).map(|i| ((i * 37 % 101) as f64 / 101.0 + 0.005).ln()).collect();
        let t = sw_normality_test(&y, 0.05).unwrap();
        assert!((t.statistic - SW_LOG_W).abs() < 1e-6, "{}", t.statistic);
        assert!(((t.p_value - SW_LOG_P) / SW_LOG_P).abs() < 1e-3, "{}", t.p_value);
    }

    const SW_POWER_W: f64 = 0.9386387827100082;
    const SW_POWER_P: f64 = 0.22595959591595688;
    const SW_LOG_W: f64 = 0.8314890378731655;
    const SW_LOG_P: f64 = 2.6010447473030783e-09;

    #[test]
    fn gaussian_accepted_exponential_rejected() {
        let t = sw_normality_test(&gaussian(100, 5), 0.05).unwrap();
        assert!(t.statistic > 0.97 && !t.reject, "{t:?}");
        let e: Vec<f64> = (1..=100).map(|i| -(1.0 - i as f64 / 101.0_f64).ln()).collect();
        assert!(sw_normality_test(&e, 0.05).unwrap().reject);
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            sw_normality_test(&gaussian(6000, 1), 0.05),
            Err(Error::SampleSizeOutOfRange { got: 6000, .. })
        ));
        assert!(sw_normality_test(&gaussian(11, 1), 0.05).is_err());
    }
}
