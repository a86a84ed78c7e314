//! Seller-revenue backtest: options priced on a training history versus
//! selling the same inventories in the spot auction.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate, CalibrationConfig, CalibrationReport};
use crate::error::{Error, Result};
use crate::model::{JumpDiffusionParams, JumpSizeDistribution, MeanExponent, OptionSpec, PriceSeries};
use crate::payoff::{payoff, PriceWindow};
use crate::pricing::{closed_form_price, mc_price, McConfig, DEFAULT_K_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarketRegime {
    Bull,
    Bear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moneyness {
    Itm,
    Atm,
    Otm,
}

impl Moneyness {
    pub const ALL: [Moneyness; 3] = [Moneyness::Itm, Moneyness::Atm, Moneyness::Otm];

    /// Strike as a multiple of the spot price at pricing time.
    pub fn strike_factor(&self) -> f64 {
        match self {
            Moneyness::Itm => 0.75,
            Moneyness::Atm => 1.0,
            Moneyness::Otm => 1.25,
        }
    }
}

/// Bull when the spot price does not exceed the average future price.
pub fn classify_regime(x0: f64, future_prices: &[f64]) -> Result<MarketRegime> {
    if future_prices.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let avg = future_prices.iter().sum::<f64>() / future_prices.len() as f64;
    Ok(if x0 <= avg {
        MarketRegime::Bull
    } else {
        MarketRegime::Bear
    })
}

/// The buyer exercises exactly when the realized payoff is positive.
pub fn decide_exercise(test_window: &PriceWindow, spec: &OptionSpec) -> Result<bool> {
    Ok(payoff(test_window, spec)? > 0.0)
}

/// Per-inventory revenues of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevenueOutcome {
    pub exercised: bool,
    pub revenue_option: f64,
    pub revenue_auction: f64,
    pub revenue_change: f64,
    pub pi0_used: f64,
}

pub fn revenue_change(pi0: f64, spec: &OptionSpec, test_window: &PriceWindow) -> Result<RevenueOutcome> {
    if !(pi0 >= 0.0 && pi0.is_finite()) {
        return Err(Error::param("pi0", format!("must be nonnegative, got {pi0}")));
    }
    spec.validate()?;
    let exercised = decide_exercise(test_window, spec)?;
    let revenue_auction = test_window.arithmetic_mean();
    if revenue_auction == 0.0 {
        return Err(Error::UndefinedRevenueRatio);
    }
    let premium = pi0 / spec.theta as f64;
    let revenue_option = premium + if exercised { spec.strike } else { revenue_auction };
    Ok(RevenueOutcome {
        exercised,
        revenue_option,
        revenue_auction,
        revenue_change: (revenue_option - revenue_auction) / revenue_auction,
        pi0_used: pi0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BacktestMethod {
    ClosedFormLogNormal,
    McLogNormal,
    McLogAde,
    McLogLaplacian,
}

impl BacktestMethod {
    pub const ALL: [BacktestMethod; 4] = [
        BacktestMethod::ClosedFormLogNormal,
        BacktestMethod::McLogNormal,
        BacktestMethod::McLogAde,
        BacktestMethod::McLogLaplacian,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestConfig {
    /// Observations between pricing time and the averaging window (`m̃`).
    pub warmup_steps: usize,
    /// Observations in the averaging window (`m`).
    pub window_steps: usize,
    pub rate: f64,
    pub theta: u64,
    pub ctr_buyer: f64,
    pub ctr_market: f64,
    pub gamma: MeanExponent,
    pub methods: Vec<BacktestMethod>,
    pub moneyness: Vec<Moneyness>,
    pub mc: McConfig,
    pub k_max: usize,
    /// Jump law for the ADE method; not calibrated.
    pub ade: JumpSizeDistribution,
    /// Jump law for the Laplacian method; not calibrated.
    pub laplacian: JumpSizeDistribution,
    pub calibration: CalibrationConfig,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            warmup_steps: 30,
            window_steps: 30,
            rate: 0.1,
            theta: 1,
            ctr_buyer: 0.2,
            ctr_market: 0.2,
            gamma: MeanExponent::GEOMETRIC,
            methods: BacktestMethod::ALL.to_vec(),
            moneyness: Moneyness::ALL.to_vec(),
            mc: McConfig::new(10_000, 0),
            k_max: DEFAULT_K_MAX,
            ade: JumpSizeDistribution::LogAde {
                eta1: 10.0,
                eta2: 10.0,
                p1: 0.5,
                p2: 0.5,
            },
            laplacian: JumpSizeDistribution::LogLaplacian { rho: 0.0, eta: 0.1 },
            calibration: CalibrationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestSlot {
    pub name: String,
    pub series: PriceSeries,
}

/// One row of the per-slot table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestOutcome {
    pub slot: String,
    pub regime: MarketRegime,
    pub moneyness: Moneyness,
    pub method: BacktestMethod,
    pub exercised: bool,
    pub pi0: f64,
    pub strike: f64,
    pub revenue_option: f64,
    pub revenue_auction: f64,
    pub revenue_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub regime: MarketRegime,
    pub moneyness: Moneyness,
    pub method: BacktestMethod,
    pub slots: usize,
    /// Percentage of slots with a positive revenue change.
    pub positive_share: f64,
    pub mean_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotCalibration {
    pub slot: String,
    pub report: CalibrationReport,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BacktestReport {
    pub outcomes: Vec<BacktestOutcome>,
    pub aggregates: Vec<AggregateRow>,
    pub calibrations: Vec<SlotCalibration>,
}

impl BacktestConfig {
    fn spec(&self, dt: f64, strike: f64) -> OptionSpec {
        OptionSpec {
            theta: self.theta,
            strike,
            ctr_buyer: self.ctr_buyer,
            ctr_market: self.ctr_market,
            start: self.warmup_steps as f64 * dt,
            expiry: (self.warmup_steps + self.window_steps) as f64 * dt,
            m: self.window_steps,
            gamma: self.gamma,
        }
    }
}

fn price(
    method: BacktestMethod,
    x0: f64,
    cal: &CalibrationReport,
    spec: &OptionSpec,
    cfg: &BacktestConfig,
    seed: u64,
) -> Result<f64> {
    let mle = &cal.mle;
    let law = match method {
        BacktestMethod::ClosedFormLogNormal | BacktestMethod::McLogNormal => mle.jump_law(),
        BacktestMethod::McLogAde => cfg.ade,
        BacktestMethod::McLogLaplacian => cfg.laplacian,
    };
    let params = JumpDiffusionParams::risk_neutral(cfg.rate, mle.sigma_hat, mle.lambda_hat, law)?;
    let result = match method {
        BacktestMethod::ClosedFormLogNormal => closed_form_price(x0, &params, spec, cfg.k_max)?,
        _ => mc_price(x0, &params, spec, &McConfig { seed, ..cfg.mc })?,
    };
    Ok(result.pi0)
}

fn run_slot(index: usize, slot: &BacktestSlot, cfg: &BacktestConfig) -> Result<(Vec<BacktestOutcome>, SlotCalibration)> {
    let horizon = cfg.warmup_steps + cfg.window_steps;
    let n = slot.series.len();
    if cfg.window_steps == 0 || n < horizon + 2 {
        return Err(Error::InsufficientData {
            needed: horizon + 2,
            got: n,
        });
    }
    let (train, test) = slot.series.split_at(n - horizon)?;
    let x0 = test.prices()[0];
    let future = &test.prices()[1..];
    let regime = classify_regime(x0, future)?;
    let window = PriceWindow::new(future[cfg.warmup_steps..].to_vec())?;
    let cal = calibrate(&train, &cfg.calibration)?;
    let seed = cfg.mc.seed.wrapping_add(index as u64);

    let mut rows = Vec::new();
    for &moneyness in &cfg.moneyness {
        let strike = moneyness.strike_factor() * x0;
        let spec = cfg.spec(train.dt(), strike);
        for &method in &cfg.methods {
            let pi0 = price(method, x0, &cal, &spec, cfg, seed)?;
            let rev = revenue_change(pi0, &spec, &window)?;
            rows.push(BacktestOutcome {
                slot: slot.name.clone(),
                regime,
                moneyness,
                method,
                exercised: rev.exercised,
                pi0,
                strike,
                revenue_option: rev.revenue_option,
                revenue_auction: rev.revenue_auction,
                revenue_change: rev.revenue_change,
            });
        }
    }
    let calibration = SlotCalibration {
        slot: slot.name.clone(),
        report: cal,
    };
    Ok((rows, calibration))
}

/// Share of positive changes and mean change per regime, moneyness and
/// method, in that sort order.
pub fn aggregate(outcomes: &[BacktestOutcome]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(MarketRegime, Moneyness, BacktestMethod), Vec<f64>> = BTreeMap::new();
    for o in outcomes {
        groups
            .entry((o.regime, o.moneyness, o.method))
            .or_default()
            .push(o.revenue_change);
    }
    groups
        .into_iter()
        .map(|((regime, moneyness, method), mut changes)| {
            // summation order fixed by value so slot order cannot matter
            changes.sort_by(f64::total_cmp);
            let n = changes.len() as f64;
            AggregateRow {
                regime,
                moneyness,
                method,
                slots: changes.len(),
                positive_share: 100.0 * changes.iter().filter(|&&c| c > 0.0).count() as f64 / n,
                mean_change: changes.iter().sum::<f64>() / n,
            }
        })
        .collect()
}

/// Each slot's last `m̃ + m` observations are the test segment and the rest
/// is used for calibration.
pub fn run_backtest_suite(slots: &[BacktestSlot], config: &BacktestConfig) -> Result<BacktestReport> {
    let per_slot: Vec<_> = slots
        .par_iter()
        .enumerate()
        .map(|(i, s)| run_slot(i, s, config))
        .collect::<Result<_>>()?;
    let mut outcomes = Vec::new();
    let mut calibrations = Vec::new();
    for (rows, cal) in per_slot {
        outcomes.extend(rows);
        calibrations.push(cal);
    }
    Ok(BacktestReport {
        aggregates: aggregate(&outcomes),
        outcomes,
        calibrations,
    })
}
