//! Explicit price for the geometric average (`γ = 0`) with log-normal jumps.
//!
//! Conditioned on `N(T) = k`, the log of the continuous geometric average is
//! taken to be `N(A_k, B_k²)` with
//!
//! ```text
//! A_k  = ½(r − λζ − ½σ²)(T + S) + kα
//! B_k² = ⅓σ²T + ⅔σ²S + kβ²
//! ```
//!
//! and the price is the Poisson mixture
//! `θ e^{−(r+λ)T} Σ_k (λT)^k/k! ((c̃/c) X₀ Ω_k 𝒩(ξ₁) − K 𝒩(ξ₂))` with
//! `Ω = e^{A + B²/2}`, `φ = ln(cK) − ln(c̃X₀)`, `ξ₂ = (A − φ)/B`, `ξ₁ = ξ₂ + B`.
//! The jump mass `kα` enters in full regardless of when the jumps arrive.

use serde::{Deserialize, Serialize};
use libm::lgamma as ln_gamma;

use super::PricingResult;
use crate::error::{Error, Result};
use crate::model::{JumpDiffusionParams, JumpSizeDistribution, OptionSpec};
use crate::special::norm_cdf;

pub const DEFAULT_K_MAX: usize = 200;

/// The series stops once a Poisson weight falls below this and `k > λT`.
pub const POISSON_WEIGHT_CUTOFF: f64 = 1e-12;

/// One term of the Poisson mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormTerm {
    pub k: usize,
    /// `e^{−λT}(λT)^k/k!`
    pub weight: f64,
    pub a: f64,
    pub b2: f64,
    pub omega: f64,
    pub phi: f64,
    pub xi1: f64,
    pub xi2: f64,
    /// Undiscounted conditional call value `(c̃/c)X₀Ω𝒩(ξ₁) − K𝒩(ξ₂)`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormTerms {
    pub terms: Vec<ClosedFormTerm>,
    /// Index of the last term kept.
    pub k_max: usize,
    /// `θ e^{−rT}`
    pub prefactor: f64,
}

impl ClosedFormTerms {
    pub fn price(&self) -> f64 {
        self.prefactor * self.terms.iter().map(|t| t.weight * t.value).sum::<f64>()
    }
}

fn poisson_weight(mean: f64, k: usize) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-mean + k as f64 * mean.ln() - ln_gamma(k as f64 + 1.0)).exp()
}

struct Series {
    asset: f64,
    strike: f64,
    lambda_t: f64,
    base_a: f64,
    base_b2: f64,
    jump_a: f64,
    jump_b2: f64,
}

impl Series {
    fn evaluate(&self, k_max: usize) -> Result<Vec<ClosedFormTerm>> {
        let phi = self.strike.ln() - self.asset.ln();
        let mut terms = Vec::new();
        for k in 0..=k_max {
            let weight = poisson_weight(self.lambda_t, k);
            let a = self.base_a + k as f64 * self.jump_a;
            let b2 = self.base_b2 + k as f64 * self.jump_b2;
            let omega = (0.5 * (b2 + 2.0 * a)).exp();
            let (xi1, xi2, value) = if b2 > 0.0 {
                let b = b2.sqrt();
                let xi2 = a / b - phi / b;
                let xi1 = b - phi / b + a / b;
                (xi1, xi2, self.asset * omega * norm_cdf(xi1) - self.strike * norm_cdf(xi2))
            } else {
                // no randomness left: the average is the constant e^A
                let sign = (a - phi).signum() * f64::INFINITY;
                (sign, sign, (self.asset * a.exp() - self.strike).max(0.0))
            };
            terms.push(ClosedFormTerm {
                k,
                weight,
                a,
                b2,
                omega,
                phi,
                xi1,
                xi2,
                value,
            });
            // with λT = 0 the k = 0 term is the whole series
            if self.lambda_t == 0.0 || (weight < POISSON_WEIGHT_CUTOFF && k as f64 > self.lambda_t) {
                return Ok(terms);
            }
        }
        Err(Error::SeriesNotConverged { terms: k_max + 1 })
    }
}

fn lognormal_jumps(params: &JumpDiffusionParams) -> Result<(f64, f64)> {
    match *params.jumps() {
        JumpSizeDistribution::LogNormal { alpha, beta } => Ok((alpha, beta)),
        other => Err(Error::Unsupported(format!(
            "explicit formula needs log-normal jumps, got {}",
            other.name()
        ))),
    }
}

fn check_x0(x0: f64) -> Result<()> {
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(Error::param("x0", format!("must be > 0, got {x0}")));
    }
    Ok(())
}

/// All per-`k` quantities of the explicit geometric-average formula.
pub fn closed_form_terms(
    x0: f64,
    params: &JumpDiffusionParams,
    spec: &OptionSpec,
    k_max: usize,
) -> Result<ClosedFormTerms> {
    let r = params.rate()?;
    spec.validate()?;
    check_x0(x0)?;
    let (alpha, beta) = lognormal_jumps(params)?;
    if !spec.gamma.is_geometric() {
        return Err(Error::Unsupported(format!(
            "explicit formula needs γ = 0, got γ = {}",
            spec.gamma
        )));
    }
    let (s, t) = (spec.start, spec.expiry);
    let sigma2 = params.sigma().powi(2);
    let series = Series {
        asset: spec.ctr_ratio() * x0,
        strike: spec.strike,
        lambda_t: params.lambda() * t,
        base_a: 0.5 * params.log_drift() * (t + s),
        base_b2: sigma2 * t / 3.0 + 2.0 * sigma2 * s / 3.0,
        jump_a: alpha,
        jump_b2: beta * beta,
    };
    let terms = series.evaluate(k_max)?;
    Ok(ClosedFormTerms {
        k_max: terms.len() - 1,
        terms,
        prefactor: spec.theta as f64 * (-r * t).exp(),
    })
}

/// Explicit price for `γ = 0` and log-normal jumps.
pub fn closed_form_price(
    x0: f64,
    params: &JumpDiffusionParams,
    spec: &OptionSpec,
    k_max: usize,
) -> Result<PricingResult> {
    closed_form_terms(x0, params, spec, k_max).map(|t| PricingResult::closed_form(t.price()))
}

/// European call on the terminal price with log-normal jumps (the `S = T`
/// case): `A_k = (r − λζ − σ²/2)T + kα`, `B_k² = σ²T + kβ²`.
#[allow(clippy::too_many_arguments)]
pub fn merton_european_price(
    x0: f64,
    params: &JumpDiffusionParams,
    strike: f64,
    expiry: f64,
    theta: u64,
    ctr_buyer: f64,
    ctr_market: f64,
    k_max: usize,
) -> Result<PricingResult> {
    let spec = OptionSpec {
        theta,
        strike,
        ctr_buyer,
        ctr_market,
        start: expiry,
        expiry,
        m: 1,
        gamma: crate::model::MeanExponent::GEOMETRIC,
    };
    let t = closed_form_terms(x0, params, &spec, k_max)?;
    Ok(PricingResult::closed_form(t.price()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MeanExponent;

    fn ln(alpha: f64, beta: f64) -> JumpSizeDistribution {
        JumpSizeDistribution::LogNormal { alpha, beta }
    }

    fn spec(start: f64, expiry: f64, strike: f64) -> OptionSpec {
        OptionSpec {
            theta: 1,
            strike,
            ctr_buyer: 1.0,
            ctr_market: 1.0,
            start,
            expiry,
            m: 50,
            gamma: MeanExponent::GEOMETRIC,
        }
    }

    #[test]
    fn gbm_single_term() {
        let params = JumpDiffusionParams::risk_neutral(0.1, 0.2, 0.0, ln(0.0, 0.0)).unwrap();
        let terms = closed_form_terms(100.0, &params, &spec(0.0, 1.0, 100.0), DEFAULT_K_MAX).unwrap();
        let t0 = terms.terms[0];
        assert!((t0.a - 0.04).abs() < 1e-15);
        assert!((t0.b2 - 0.04 / 3.0).abs() < 1e-15);
        assert_eq!(t0.phi, 0.0);
        assert_eq!(terms.terms.len(), 1);
        let only_k0 = closed_form_price(100.0, &params, &spec(0.0, 1.0, 100.0), 0).unwrap();
        assert_eq!(only_k0.pi0, terms.price());
        // A = 0.04, B² = σ²T/3 evaluated independently with mpmath
        assert!((terms.price() - 6.769_950_595_122_83).abs() < 1e-10, "{}", terms.price());
    }

    #[test]
    fn zero_strike_limit() {
        let jumps = ln(-0.05, 0.1);
        let params = JumpDiffusionParams::risk_neutral(0.05, 0.3, 2.0, jumps).unwrap();
        let s = spec(0.2, 1.0, 1e-200);
        let terms = closed_form_terms(50.0, &params, &s, DEFAULT_K_MAX).unwrap();
        let want = (-(0.05 + 2.0) * 1.0f64).exp()
            * terms
                .terms
                .iter()
                .map(|t| 2.0f64.powi(t.k as i32) / (1..=t.k).map(|i| i as f64).product::<f64>() * 50.0 * t.omega)
                .sum::<f64>();
        assert!((terms.price() - want).abs() < 1e-10 * want);
    }

    #[test]
    fn rejects_unsupported_configurations() {
        let lap = JumpSizeDistribution::LogLaplacian { rho: 0.0, eta: 0.1 };
        let params = JumpDiffusionParams::risk_neutral(0.05, 0.3, 2.0, lap).unwrap();
        assert!(matches!(
            closed_form_price(1.0, &params, &spec(0.0, 1.0, 1.0), DEFAULT_K_MAX),
            Err(Error::Unsupported(_))
        ));
        let params = JumpDiffusionParams::risk_neutral(0.05, 0.3, 2.0, ln(0.0, 0.1)).unwrap();
        let mut s = spec(0.0, 1.0, 1.0);
        s.gamma = MeanExponent::ARITHMETIC;
        assert!(matches!(closed_form_price(1.0, &params, &s, DEFAULT_K_MAX), Err(Error::Unsupported(_))));
    }

    #[test]
    fn non_convergence_when_k_max_too_small() {
        let params = JumpDiffusionParams::risk_neutral(0.05, 0.3, 20.0, ln(0.0, 0.1)).unwrap();
        assert_eq!(
            closed_form_price(1.0, &params, &spec(0.0, 1.0, 1.0), 10),
            Err(Error::SeriesNotConverged { terms: 11 })
        );
    }

    #[test]
    fn deep_out_of_the_money_european() {
        let params = JumpDiffusionParams::risk_neutral(0.05, 0.2, 1.0, ln(-0.1, 0.15)).unwrap();
        let fwd = 100.0 * ((0.05 + 1.0 * params.zeta()) * 1.0f64).exp();
        let res = merton_european_price(100.0, &params, 10.0 * fwd, 1.0, 1, 1.0, 1.0, DEFAULT_K_MAX).unwrap();
        assert!(res.pi0 < 1e-4 * 100.0 && res.pi0 >= 0.0, "{}", res.pi0);
    }

    #[test]
    fn degenerate_variance_uses_intrinsic_value() {
        let params = JumpDiffusionParams::risk_neutral(0.1, 0.0, 0.0, ln(0.0, 0.0)).unwrap();
        let s = spec(0.0, 1.0, 90.0);
        let res = closed_form_price(100.0, &params, &s, DEFAULT_K_MAX).unwrap();
        let want = (-0.1f64).exp() * (100.0 * 0.05f64.exp() - 90.0);
        assert!((res.pi0 - want).abs() < 1e-12);
    }

    #[test]
    fn tail_remainder_is_negligible() {
        for (lambda, alpha, beta) in [(0.5, 0.1, 0.2), (5.0, 0.1, 0.2), (2.0, -0.2, 0.3), (10.0, 0.05, 0.05)] {
            let params = JumpDiffusionParams::risk_neutral(0.1, 0.3, lambda, ln(alpha, beta)).unwrap();
            let s = spec(0.1, 1.0, 100.0);
            let terms = closed_form_terms(100.0, &params, &s, DEFAULT_K_MAX).unwrap();
            let price = terms.price();
            let last = terms.k_max;
            // bound each omitted term by its weight times X₀Ω_k, summed far out
            let lt = lambda * 1.0;
            let growth = (alpha + 0.5 * beta * beta).exp();
            let tail: f64 = (last + 1..last + 400)
                .map(|k| poisson_weight(lt, k) * 100.0 * terms.terms[0].omega * growth.powi(k as i32))
                .sum();
            assert!(terms.prefactor * tail < 1e-9 * price, "λ={lambda}: tail {tail}");
            // tail terms shrink monotonically
            let contrib: Vec<f64> = terms.terms.iter().map(|t| t.weight * t.value).collect();
            let peak = contrib.iter().enumerate().fold(0, |b, (i, c)| if *c > contrib[b] { i } else { b });
            assert!(contrib[peak..].windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
