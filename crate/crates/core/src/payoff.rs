//! Power-mean statistic and the option payoff
//! `Φ(X) = θ · ((c̃/c)·ψ(γ|X) − K)⁺`.

use crate::error::{Error, Result};
use crate::model::{MeanExponent, OptionSpec};

/// Below this |γ| the power mean is evaluated as the geometric mean.
pub const GEOMETRIC_CUTOFF: f64 = 1e-6;

/// Prices observed inside the averaging window.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceWindow {
    prices: Vec<f64>,
}

impl PriceWindow {
    pub fn new(prices: Vec<f64>) -> Result<Self> {
        if prices.is_empty() {
            return Err(Error::InvalidSeries("averaging window is empty".into()));
        }
        if let Some(p) = prices.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidSeries(format!("window price {p} is not positive")));
        }
        Ok(Self { prices })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn arithmetic_mean(&self) -> f64 {
        self.prices.iter().sum::<f64>() / self.len() as f64
    }
}

/// `ψ(γ|X) = (Σ X_iᵞ / m)^{1/γ}` with its `γ ∈ {−∞, 0, +∞}` limits.
pub fn power_mean(window: &PriceWindow, gamma: MeanExponent) -> f64 {
    match gamma {
        MeanExponent::Min => window.prices.iter().copied().fold(f64::INFINITY, f64::min),
        MeanExponent::Max => window.prices.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        MeanExponent::Finite(1.0) => window.arithmetic_mean(),
        MeanExponent::Finite(_) => {
            let logs: Vec<f64> = window.prices.iter().map(|p| p.ln()).collect();
            power_mean_of_logs(&logs, gamma)
        }
    }
}

/// Power mean of `exp(log_prices)`, computed in log space so that large
/// `|γ|` cannot overflow.
pub fn power_mean_of_logs(log_prices: &[f64], gamma: MeanExponent) -> f64 {
    debug_assert!(!log_prices.is_empty());
    let n = log_prices.len() as f64;
    match gamma {
        MeanExponent::Min => log_prices.iter().copied().fold(f64::INFINITY, f64::min).exp(),
        MeanExponent::Max => log_prices.iter().copied().fold(f64::NEG_INFINITY, f64::max).exp(),
        MeanExponent::Finite(g) if g.abs() < GEOMETRIC_CUTOFF => {
            (log_prices.iter().sum::<f64>() / n).exp()
        }
        MeanExponent::Finite(g) => {
            let peak = log_prices
                .iter()
                .map(|l| g * l)
                .fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = log_prices.iter().map(|l| (g * l - peak).exp()).sum();
            ((peak + (sum / n).ln()) / g).exp()
        }
    }
}

/// Payoff per contract given the window power mean.
pub fn payoff_from_mean(mean: f64, spec: &OptionSpec) -> f64 {
    let intrinsic = spec.ctr_ratio() * mean - spec.strike;
    spec.theta as f64 * intrinsic.max(0.0)
}

pub fn payoff(window: &PriceWindow, spec: &OptionSpec) -> Result<f64> {
    if window.len() != spec.m {
        return Err(Error::WindowLength {
            expected: spec.m,
            got: window.len(),
        });
    }
    Ok(payoff_from_mean(power_mean(window, spec.gamma), spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(p: &[f64]) -> PriceWindow {
        PriceWindow::new(p.to_vec()).unwrap()
    }

    fn spec(theta: u64, strike: f64, m: usize) -> OptionSpec {
        OptionSpec {
            theta,
            strike,
            ctr_buyer: 0.2,
            ctr_market: 0.2,
            start: 0.0,
            expiry: 1.0,
            m,
            gamma: MeanExponent::ARITHMETIC,
        }
    }

    #[test]
    fn special_cases() {
        let f = MeanExponent::Finite;
        assert_eq!(power_mean(&w(&[1.0, 2.0, 3.0]), f(1.0)), 2.0);
        assert!((power_mean(&w(&[1.0, 4.0]), f(0.0)) - 2.0).abs() < 1e-15);
        assert!((power_mean(&w(&[1.0, 7.0]), f(2.0)) - 5.0).abs() < 1e-14);
        assert_eq!(power_mean(&w(&[3.0, 1.0, 2.0]), MeanExponent::Min), 1.0);
        assert_eq!(power_mean(&w(&[3.0, 1.0, 2.0]), MeanExponent::Max), 3.0);
        assert!((power_mean(&w(&[1.0, 4.0, 4.0]), f(-1.0)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn large_exponents_do_not_overflow() {
        let v = power_mean(&w(&[1e300, 1e300]), MeanExponent::Finite(50.0));
        assert!((v / 1e300 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn window_rejects_bad_prices() {
        assert!(PriceWindow::new(vec![]).is_err());
        assert!(PriceWindow::new(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn payoff_examples() {
        let s = spec(1000, 1.5, 3);
        assert_eq!(payoff(&w(&[2.0, 2.0, 2.0]), &s).unwrap(), 500.0);
        let atm = spec(7, 2.0, 3);
        assert_eq!(payoff(&w(&[2.0, 2.0, 2.0]), &atm).unwrap(), 0.0);
        assert_eq!(
            payoff(&w(&[2.0, 2.0]), &s),
            Err(Error::WindowLength { expected: 3, got: 2 })
        );
    }

    #[test]
    fn payoff_matches_direct_formula() {
        // θ=1, c=c̃=0.2, K=0.75·X₀, geometric mean, evaluated term by term
        let x0 = 1.37;
        let window = [1.2, 1.55, 0.98, 1.41, 1.73];
        let mut s = spec(1, 0.75 * x0, window.len());
        s.gamma = MeanExponent::GEOMETRIC;
        let product: f64 = window.iter().product();
        let direct = (0.2 / 0.2 * product.powf(1.0 / 5.0) - 0.75 * x0).max(0.0);
        let got = payoff(&w(&window), &s).unwrap();
        assert!(got >= 0.0);
        assert!((got - direct).abs() < 1e-14);
    }

    fn window_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..100.0, 1..20)
    }

    proptest! {
        #[test]
        fn monotone_in_exponent(p in window_strategy(), a in -30.0f64..30.0, b in -30.0f64..30.0) {
            let win = w(&p);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let plo = power_mean(&win, MeanExponent::Finite(lo));
            let phi = power_mean(&win, MeanExponent::Finite(hi));
            prop_assert!(plo <= phi * (1.0 + 1e-12));
            prop_assert!(power_mean(&win, MeanExponent::Min) <= plo * (1.0 + 1e-12));
            prop_assert!(phi <= power_mean(&win, MeanExponent::Max) * (1.0 + 1e-12));
        }

        #[test]
        fn continuous_at_zero(p in window_strategy()) {
            let win = w(&p);
            let g0 = power_mean(&win, MeanExponent::GEOMETRIC);
            let near = power_mean(&win, MeanExponent::Finite(1e-8));
            prop_assert!((near - g0).abs() < 1e-6 * g0);
        }

        #[test]
        fn payoff_monotone_and_homogeneous(
            p in window_strategy(),
            k in 0.01f64..100.0,
            bump in 0usize..20,
            s in 0.1f64..10.0,
        ) {
            let m = p.len();
            let base = spec(3, k, m);
            let v = payoff(&w(&p), &base).unwrap();

            let mut up = p.clone();
            up[bump % m] *= 1.1;
            prop_assert!(payoff(&w(&up), &base).unwrap() >= v);

            let higher_k = spec(3, k * 1.1, m);
            prop_assert!(payoff(&w(&p), &higher_k).unwrap() <= v);

            let scaled: Vec<f64> = p.iter().map(|x| x * s).collect();
            let scaled_spec = spec(3, k * s, m);
            let vs = payoff(&w(&scaled), &scaled_spec).unwrap();
            prop_assert!((vs - s * v).abs() <= 1e-9 * (1.0 + s * v));
        }
    }
}
