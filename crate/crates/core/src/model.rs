//! Domain types shared by every part of the engine: price series, the
//! jump-diffusion model, contract terms and the simulation time grid.
//!
//! Time is annualized throughout: one year is `1.0`, a day is `1/365` and an
//! hour is `1/(365·24)`.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

pub const DAYS_PER_YEAR: f64 = 365.0;
pub const DAILY_DT: f64 = 1.0 / DAYS_PER_YEAR;
pub const HOURLY_DT: f64 = 1.0 / (DAYS_PER_YEAR * 24.0);

/// Relative tolerance used when checking that timestamps are evenly spaced.
pub const SPACING_RTOL: f64 = 1e-9;

/// Law of the log jump size `V = ln Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum JumpSizeDistribution {
    /// `V ~ N(alpha, beta²)`.
    LogNormal { alpha: f64, beta: f64 },
    /// Asymmetric double exponential: `+Exp(eta1)` w.p. `p1`, `−Exp(eta2)` w.p. `p2`.
    LogAde { eta1: f64, eta2: f64, p1: f64, p2: f64 },
    /// Laplace with location `rho` and scale `eta`.
    LogLaplacian { rho: f64, eta: f64 },
}

impl JumpSizeDistribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        match *self {
            JumpSizeDistribution::LogNormal { alpha, beta } => {
                if !alpha.is_finite() || !beta.is_finite() {
                    return bad(format!("log-normal parameters must be finite ({alpha}, {beta})"));
                }
                if beta < 0.0 {
                    return bad(format!("log-normal beta must be >= 0, got {beta}"));
                }
            }
            JumpSizeDistribution::LogAde { eta1, eta2, p1, p2 } => {
                if !(eta1 > 1.0) || !eta1.is_finite() {
                    return bad(format!("ADE eta1 must be > 1, got {eta1}"));
                }
                if !(eta2 > 0.0) || !eta2.is_finite() {
                    return bad(format!("ADE eta2 must be > 0, got {eta2}"));
                }
                if !(0.0..=1.0).contains(&p1) || !(0.0..=1.0).contains(&p2) {
                    return bad(format!("ADE probabilities must lie in [0,1], got p1={p1}, p2={p2}"));
                }
                if (p1 + p2 - 1.0).abs() > 1e-12 {
                    return bad(format!("ADE probabilities must sum to 1, got {}", p1 + p2));
                }
            }
            JumpSizeDistribution::LogLaplacian { rho, eta } => {
                if !rho.is_finite() {
                    return bad(format!("Laplacian rho must be finite, got {rho}"));
                }
                if !(eta > 0.0 && eta < 1.0) {
                    return bad(format!("Laplacian eta must lie in (0,1), got {eta}"));
                }
            }
        }
        Ok(())
    }

    /// Mean of the log jump size.
    pub fn mean(&self) -> f64 {
        match *self {
            JumpSizeDistribution::LogNormal { alpha, .. } => alpha,
            JumpSizeDistribution::LogAde { eta1, eta2, p1, p2 } => p1 / eta1 - p2 / eta2,
            JumpSizeDistribution::LogLaplacian { rho, .. } => rho,
        }
    }

    /// Variance of the log jump size.
    pub fn variance(&self) -> f64 {
        match *self {
            JumpSizeDistribution::LogNormal { beta, .. } => beta * beta,
            JumpSizeDistribution::LogAde { eta1, eta2, p1, p2 } => {
                let second = 2.0 * p1 / (eta1 * eta1) + 2.0 * p2 / (eta2 * eta2);
                second - self.mean().powi(2)
            }
            JumpSizeDistribution::LogLaplacian { eta, .. } => 2.0 * eta * eta,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            JumpSizeDistribution::LogNormal { .. } => "log_normal",
            JumpSizeDistribution::LogAde { .. } => "log_ade",
            JumpSizeDistribution::LogLaplacian { .. } => "log_laplacian",
        }
    }
}

/// Mean relative jump size `E[e^V] − 1`.
pub fn zeta(dist: &JumpSizeDistribution) -> Result<f64> {
    dist.validate()?;
    Ok(match *dist {
        JumpSizeDistribution::LogNormal { alpha, beta } => (alpha + 0.5 * beta * beta).exp_m1(),
        JumpSizeDistribution::LogAde { eta1, eta2, p1, p2 } => {
            p1 * eta1 / (eta1 - 1.0) + p2 * eta2 / (eta2 + 1.0) - 1.0
        }
        JumpSizeDistribution::LogLaplacian { rho, eta } => rho.exp() / (1.0 - eta * eta) - 1.0,
    })
}

/// Log-space per-year drift under the risk-neutral measure, `r − λζ − σ²/2`.
pub fn risk_neutral_drift(r: f64, sigma: f64, lambda: f64, dist: &JumpSizeDistribution) -> Result<f64> {
    let z = zeta(dist)?;
    Ok(r - lambda * z - 0.5 * sigma * sigma)
}

/// Which measure the drift belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "snake_case")]
pub enum Drift {
    /// Physical drift `mu` per year, as estimated from history.
    RealWorld { mu: f64 },
    /// Riskless rate `r`; the jump compensator is applied automatically.
    RiskNeutral { r: f64 },
}

/// Parameters of `dX/X = mu dt + sigma dW + d(Σ (Y_i − 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct JumpDiffusionParams {
    drift: Drift,
    sigma: f64,
    lambda: f64,
    jumps: JumpSizeDistribution,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    drift: Drift,
    sigma: f64,
    lambda: f64,
    jumps: JumpSizeDistribution,
}

impl TryFrom<RawParams> for JumpDiffusionParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        JumpDiffusionParams::new(raw.drift, raw.sigma, raw.lambda, raw.jumps)
    }
}

impl From<JumpDiffusionParams> for RawParams {
    fn from(p: JumpDiffusionParams) -> Self {
        RawParams {
            drift: p.drift,
            sigma: p.sigma,
            lambda: p.lambda,
            jumps: p.jumps,
        }
    }
}

impl JumpDiffusionParams {
    pub fn new(drift: Drift, sigma: f64, lambda: f64, jumps: JumpSizeDistribution) -> Result<Self> {
        let rate = match drift {
            Drift::RealWorld { mu } => mu,
            Drift::RiskNeutral { r } => r,
        };
        if !rate.is_finite() {
            return Err(Error::param("drift", format!("must be finite, got {rate}")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::param("sigma", format!("must be finite and >= 0, got {sigma}")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::param("lambda", format!("must be finite and >= 0, got {lambda}")));
        }
        jumps.validate()?;
        Ok(Self {
            drift,
            sigma,
            lambda,
            jumps,
        })
    }

    pub fn risk_neutral(r: f64, sigma: f64, lambda: f64, jumps: JumpSizeDistribution) -> Result<Self> {
        Self::new(Drift::RiskNeutral { r }, sigma, lambda, jumps)
    }

    pub fn real_world(mu: f64, sigma: f64, lambda: f64, jumps: JumpSizeDistribution) -> Result<Self> {
        Self::new(Drift::RealWorld { mu }, sigma, lambda, jumps)
    }

    pub fn drift(&self) -> Drift {
        self.drift
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn jumps(&self) -> &JumpSizeDistribution {
        &self.jumps
    }

    pub fn is_risk_neutral(&self) -> bool {
        matches!(self.drift, Drift::RiskNeutral { .. })
    }

    /// Riskless rate, or an error if these are real-world parameters.
    pub fn rate(&self) -> Result<f64> {
        match self.drift {
            Drift::RiskNeutral { r } => Ok(r),
            Drift::RealWorld { .. } => Err(Error::RealWorldMeasure),
        }
    }

    pub fn zeta(&self) -> f64 {
        // validated at construction
        zeta(&self.jumps).expect("validated jump distribution")
    }

    /// Per-year drift of `ln X`: `r − λζ − σ²/2` (risk-neutral) or `mu − σ²/2`.
    pub fn log_drift(&self) -> f64 {
        match self.drift {
            Drift::RiskNeutral { r } => r - self.lambda * self.zeta() - 0.5 * self.sigma * self.sigma,
            Drift::RealWorld { mu } => mu - 0.5 * self.sigma * self.sigma,
        }
    }

    pub fn with_rate(&self, r: f64) -> Result<Self> {
        Self::new(Drift::RiskNeutral { r }, self.sigma, self.lambda, self.jumps)
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.drift, sigma, self.lambda, self.jumps)
    }
}

/// Exponent of the power mean. `Min` and `Max` are the `γ = ∓∞` limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanExponent {
    Min,
    Finite(f64),
    Max,
}

impl MeanExponent {
    pub const GEOMETRIC: MeanExponent = MeanExponent::Finite(0.0);
    pub const ARITHMETIC: MeanExponent = MeanExponent::Finite(1.0);

    pub fn from_f64(g: f64) -> Result<Self> {
        if g.is_nan() {
            Err(Error::param("gamma", "must not be NaN"))
        } else if g == f64::NEG_INFINITY {
            Ok(MeanExponent::Min)
        } else if g == f64::INFINITY {
            Ok(MeanExponent::Max)
        } else {
            Ok(MeanExponent::Finite(g))
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            MeanExponent::Min => f64::NEG_INFINITY,
            MeanExponent::Finite(g) => g,
            MeanExponent::Max => f64::INFINITY,
        }
    }

    pub fn is_geometric(&self) -> bool {
        matches!(*self, MeanExponent::Finite(g) if g == 0.0)
    }
}

impl PartialOrd for MeanExponent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.as_f64().partial_cmp(&other.as_f64())
    }
}

impl fmt::Display for MeanExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanExponent::Min => f.write_str("min"),
            MeanExponent::Max => f.write_str("max"),
            MeanExponent::Finite(g) => write!(f, "{g}"),
        }
    }
}

impl Serialize for MeanExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            MeanExponent::Min => s.serialize_str("min"),
            MeanExponent::Max => s.serialize_str("max"),
            MeanExponent::Finite(g) => s.serialize_f64(g),
        }
    }
}

impl<'de> Deserialize<'de> for MeanExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExponentVisitor;

        impl Visitor<'_> for ExponentVisitor {
            type Value = MeanExponent;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"min\", \"max\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<MeanExponent, E> {
                if v.is_finite() {
                    Ok(MeanExponent::Finite(v))
                } else {
                    Err(E::custom("non-finite exponents must be written as \"min\" or \"max\""))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<MeanExponent, E> {
                Ok(MeanExponent::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<MeanExponent, E> {
                Ok(MeanExponent::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<MeanExponent, E> {
                match v {
                    "min" => Ok(MeanExponent::Min),
                    "max" => Ok(MeanExponent::Max),
                    other => other
                        .parse::<f64>()
                        .ok()
                        .filter(|g| g.is_finite())
                        .map(MeanExponent::Finite)
                        .ok_or_else(|| E::custom(format!("invalid exponent `{other}`"))),
                }
            }
        }

        d.deserialize_any(ExponentVisitor)
    }
}

/// Contract terms of an average-price advertising option.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    /// Number of inventories (impressions or clicks) requested.
    pub theta: u64,
    /// Exercise price per inventory.
    pub strike: f64,
    /// CTR of the buyer's own advertisement (`c`).
    pub ctr_buyer: f64,
    /// Average CTR of comparable advertisements (`c̃`).
    pub ctr_market: f64,
    /// Start of the averaging window, in years.
    pub start: f64,
    /// End of the averaging window and expiry, in years.
    pub expiry: f64,
    /// Number of averaging observations in `[start, expiry]`.
    pub m: usize,
    pub gamma: MeanExponent,
}

impl OptionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.theta < 1 {
            return Err(Error::param("theta", "must be >= 1"));
        }
        if !(self.strike > 0.0) || !self.strike.is_finite() {
            return Err(Error::param("strike", format!("must be > 0, got {}", self.strike)));
        }
        for (field, c) in [("ctr_buyer", self.ctr_buyer), ("ctr_market", self.ctr_market)] {
            if !(c > 0.0 && c <= 1.0) {
                return Err(Error::param(field, format!("must lie in (0,1], got {c}")));
            }
        }
        if !(self.start >= 0.0) || !self.start.is_finite() {
            return Err(Error::param("start", format!("must be >= 0, got {}", self.start)));
        }
        if !(self.expiry >= self.start) || !self.expiry.is_finite() {
            return Err(Error::param(
                "expiry",
                format!("must be >= start ({}), got {}", self.start, self.expiry),
            ));
        }
        if self.expiry <= 0.0 {
            return Err(Error::param("expiry", "must be > 0"));
        }
        if self.m < 1 {
            return Err(Error::param("m", "must be >= 1"));
        }
        if let MeanExponent::Finite(g) = self.gamma {
            if !g.is_finite() {
                return Err(Error::param("gamma", "finite exponent expected"));
            }
        }
        Ok(())
    }

    /// `c̃ / c`, the CTR quality adjustment applied to the market average.
    pub fn ctr_ratio(&self) -> f64 {
        self.ctr_market / self.ctr_buyer
    }
}

/// Uniform simulation grid covering the warm-up `[0, S]` and the averaging
/// window `[S, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    dt: f64,
    warmup_steps: usize,
    window_steps: usize,
    horizon: f64,
    substeps: usize,
}

impl TimeGrid {
    /// Step size of one grid interval in years.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `m̃`, the steps before the averaging window opens.
    pub fn warmup_steps(&self) -> usize {
        self.warmup_steps
    }

    /// `m`, the number of averaging observations.
    pub fn window_steps(&self) -> usize {
        self.window_steps
    }

    pub fn total_steps(&self) -> usize {
        self.warmup_steps + self.window_steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of simulation sub-steps per grid interval (1 = one Bernoulli
    /// trial per interval).
    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn sub_dt(&self) -> f64 {
        self.dt / self.substeps as f64
    }

    /// Grid time `t_i = i·T/(m̃+m)` for `i = 1..=m̃+m`.
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.horizon / self.total_steps() as f64
    }

    /// Splits every interval into `substeps` simulation steps.
    pub fn with_substeps(self, substeps: usize) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::param("substeps", "must be >= 1"));
        }
        Ok(Self { substeps, ..self })
    }

    /// A plain grid of `steps` intervals of length `dt` whose last `window`
    /// points form the averaging window.
    pub fn uniform(dt: f64, warmup_steps: usize, window_steps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        if window_steps == 0 {
            return Err(Error::param("m", "must be >= 1"));
        }
        Ok(Self {
            dt,
            warmup_steps,
            window_steps,
            horizon: dt * (warmup_steps + window_steps) as f64,
            substeps: 1,
        })
    }
}

/// Builds the simulation grid for a contract: `Δt = (T−S)/m`, `m̃ = ⌈S/Δt⌉`.
///
/// When `S = T` the window collapses to the single terminal price and the
/// grid is one step of length `T`.
pub fn build_time_grid(spec: &OptionSpec) -> Result<TimeGrid> {
    spec.validate()?;
    let (start, expiry, m) = (spec.start, spec.expiry, spec.m);
    if expiry == start {
        if m != 1 {
            return Err(Error::DegenerateWindow { m });
        }
        return Ok(TimeGrid {
            dt: expiry,
            warmup_steps: 0,
            window_steps: 1,
            horizon: expiry,
            substeps: 1,
        });
    }
    let dt = (expiry - start) / m as f64;
    // S/Δt is often an integer up to rounding, e.g. 0.0822 / 0.00274.
    let ratio = start / dt;
    let nearest = ratio.round();
    let warmup = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    Ok(TimeGrid {
        dt,
        warmup_steps: warmup as usize,
        window_steps: m,
        horizon: expiry,
        substeps: 1,
    })
}

/// Evenly spaced positive prices with their annualized timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    timestamps: Vec<f64>,
    prices: Vec<f64>,
    dt: f64,
}

impl PriceSeries {
    /// Validates spacing and positivity; `dt` is inferred from the timestamps.
    pub fn new(timestamps: Vec<f64>, prices: Vec<f64>) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(Error::InvalidSeries(format!(
                "{} timestamps but {} prices",
                timestamps.len(),
                prices.len()
            )));
        }
        if prices.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "need at least 2 observations, got {}",
                prices.len()
            )));
        }
        if let Some((i, p)) = prices.iter().enumerate().find(|(_, p)| !(**p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidSeries(format!("price at index {i} is not positive: {p}")));
        }
        let dt = (timestamps[timestamps.len() - 1] - timestamps[0]) / (timestamps.len() - 1) as f64;
        if !(dt > 0.0) {
            return Err(Error::InvalidSeries("timestamps must be strictly increasing".into()));
        }
        for (i, w) in timestamps.windows(2).enumerate() {
            let gap = w[1] - w[0];
            if !(gap > 0.0) || ((gap - dt) / dt).abs() > SPACING_RTOL {
                return Err(Error::InvalidSeries(format!(
                    "non-uniform spacing between index {i} and {}: gap {gap} vs {dt}",
                    i + 1
                )));
            }
        }
        Ok(Self {
            timestamps,
            prices,
            dt,
        })
    }

    /// Series starting at time zero with spacing `dt`.
    pub fn from_prices(prices: Vec<f64>, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidSeries(format!("dt must be > 0, got {dt}")));
        }
        let timestamps = (0..prices.len()).map(|i| i as f64 * dt).collect();
        let mut s = Self::new(timestamps, prices)?;
        s.dt = dt;
        Ok(s)
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// Splits into `[0, at)` and `[at-1, len)`: the second part starts at the
    /// last price of the first so its first element is the pricing-time spot.
    pub fn split_at(&self, at: usize) -> Result<(PriceSeries, PriceSeries)> {
        if at < 2 || at > self.len() - 1 {
            return Err(Error::InvalidSeries(format!(
                "split index {at} leaves fewer than 2 points on one side"
            )));
        }
        let head = Self::from_parts(&self.timestamps[..at], &self.prices[..at], self.dt);
        let tail = Self::from_parts(&self.timestamps[at - 1..], &self.prices[at - 1..], self.dt);
        Ok((head, tail))
    }

    fn from_parts(ts: &[f64], ps: &[f64], dt: f64) -> Self {
        Self {
            timestamps: ts.to_vec(),
            prices: ps.to_vec(),
            dt,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln(alpha: f64, beta: f64) -> JumpSizeDistribution {
        JumpSizeDistribution::LogNormal { alpha, beta }
    }

    #[test]
    fn zeta_closed_forms() {
        assert_eq!(zeta(&ln(0.0, 0.0)).unwrap(), 0.0);
        let ade = JumpSizeDistribution::LogAde {
            eta1: 2.0,
            eta2: 1.0,
            p1: 1.0,
            p2: 0.0,
        };
        assert!((zeta(&ade).unwrap() - 1.0).abs() < 1e-15);
        let lap = JumpSizeDistribution::LogLaplacian { rho: 0.0, eta: 0.5 };
        assert!((zeta(&lap).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((zeta(&ln(0.1, 0.2)).unwrap() - 0.127_496_851_579_376_8).abs() < 1e-12);
    }

    #[test]
    fn zeta_rejects_invalid_laws() {
        let ade = JumpSizeDistribution::LogAde {
            eta1: 1.0,
            eta2: 1.0,
            p1: 0.5,
            p2: 0.5,
        };
        assert!(matches!(zeta(&ade), Err(Error::InvalidDistribution(_))));
        let typo = JumpSizeDistribution::LogAde {
            eta1: 3.0,
            eta2: 1.0,
            p1: 0.5,
            p2: 0.6,
        };
        assert!(zeta(&typo).is_err());
        assert!(zeta(&JumpSizeDistribution::LogLaplacian { rho: 0.0, eta: 1.0 }).is_err());
        assert!(zeta(&ln(0.0, -0.1)).is_err());
    }

    #[test]
    fn zeta_lognormal_exceeds_deterministic_jump() {
        for alpha in [-0.5, 0.0, 0.3] {
            for beta in [0.01, 0.2, 1.0] {
                assert!(zeta(&ln(alpha, beta)).unwrap() > alpha.exp_m1());
            }
        }
    }

    #[test]
    fn risk_neutral_drift_examples() {
        let any = ln(0.3, 0.1);
        assert_eq!(risk_neutral_drift(0.1, 0.0, 0.0, &any).unwrap(), 0.1);
        let d = risk_neutral_drift(0.1, 0.2, 0.0, &ln(0.0, 0.0)).unwrap();
        assert!((d - 0.08).abs() < 1e-15);
        let lap = JumpSizeDistribution::LogLaplacian { rho: 0.0, eta: 0.5 };
        let d = risk_neutral_drift(0.1, 0.2, 2.0, &lap).unwrap();
        assert!((d - (0.1 - 2.0 / 3.0 - 0.02)).abs() < 1e-14);
    }

    #[test]
    fn params_reject_negative_sigma_and_lambda() {
        assert!(JumpDiffusionParams::risk_neutral(0.1, -0.1, 0.0, ln(0.0, 0.0)).is_err());
        assert!(JumpDiffusionParams::risk_neutral(0.1, 0.1, -1.0, ln(0.0, 0.0)).is_err());
        let rw = JumpDiffusionParams::real_world(0.3, 0.1, 0.0, ln(0.0, 0.0)).unwrap();
        assert_eq!(rw.rate(), Err(Error::RealWorldMeasure));
    }

    fn spec(start: f64, expiry: f64, m: usize) -> OptionSpec {
        OptionSpec {
            theta: 1,
            strike: 1.0,
            ctr_buyer: 1.0,
            ctr_market: 1.0,
            start,
            expiry,
            m,
            gamma: MeanExponent::GEOMETRIC,
        }
    }

    #[test]
    fn grid_for_daily_window() {
        let g = build_time_grid(&spec(0.0822, 0.1644, 30)).unwrap();
        assert!((g.dt() - 0.00274).abs() < 1e-12);
        assert_eq!(g.warmup_steps(), 30);
        assert_eq!(g.window_steps(), 30);

        let g = build_time_grid(&spec(0.0, 0.0027, 1)).unwrap();
        assert!((g.dt() - 0.0027).abs() < 1e-15);
        assert_eq!(g.warmup_steps(), 0);
    }

    #[test]
    fn grid_european_and_degenerate() {
        let g = build_time_grid(&spec(1.0, 1.0, 1)).unwrap();
        assert_eq!(g.total_steps(), 1);
        assert_eq!(g.time(1), 1.0);
        assert_eq!(
            build_time_grid(&spec(1.0, 1.0, 3)),
            Err(Error::DegenerateWindow { m: 3 })
        );
    }

    #[test]
    fn grid_warmup_brackets_start() {
        for (s, t, m) in [(0.1, 0.35, 7), (0.0822, 0.1644, 30), (0.3, 1.0, 13), (0.05, 0.06, 3)] {
            let g = build_time_grid(&spec(s, t, m)).unwrap();
            let mt = g.warmup_steps() as f64;
            assert!(mt * g.dt() >= s * (1.0 - 1e-9), "{s} {t} {m}");
            assert!(s > (mt - 1.0) * g.dt());
        }
    }

    #[test]
    fn exponent_serde() {
        let v: Vec<MeanExponent> = serde_json::from_str(r#"["min", 0, 1.5, "max"]"#).unwrap();
        assert_eq!(
            v,
            vec![
                MeanExponent::Min,
                MeanExponent::Finite(0.0),
                MeanExponent::Finite(1.5),
                MeanExponent::Max
            ]
        );
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["min",0.0,1.5,"max"]"#);
    }

    #[test]
    fn series_validation() {
        assert!(PriceSeries::from_prices(vec![1.0, 2.0, 3.0], DAILY_DT).is_ok());
        assert!(PriceSeries::from_prices(vec![1.0], DAILY_DT).is_err());
        assert!(PriceSeries::from_prices(vec![1.0, 0.0], DAILY_DT).is_err());
        assert!(PriceSeries::new(vec![0.0, 1.0, 3.0], vec![1.0, 1.0, 1.0]).is_err());
        let s = PriceSeries::new(vec![0.0, 0.5, 1.0], vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.dt(), 0.5);
    }
}
