//! Pricing engine for average-price advertising options whose underlying
//! spot price follows a jump-diffusion.
//!
//! The crate covers exact grid simulation ([`simulation`]), the power-mean
//! payoff ([`payoff`]), Monte Carlo and explicit pricing ([`pricing`]),
//! calibration from auction price histories ([`calibration`]), stylized-fact
//! diagnostics ([`stats`]) and a seller-revenue backtest ([`backtest`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtest;
pub mod calibration;
pub mod error;
pub mod model;
pub mod payoff;
pub mod pricing;
pub mod rng;
pub mod simulation;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use model::{
    build_time_grid, risk_neutral_drift, zeta, Drift, JumpDiffusionParams, JumpSizeDistribution,
    MeanExponent, OptionSpec, PriceSeries, TimeGrid, DAILY_DT, HOURLY_DT,
};
pub use payoff::{payoff, power_mean, PriceWindow};
pub use pricing::{
    closed_form_price, mc_price, merton_european_price, McConfig, PricingInputs, PricingMethod,
    PricingResult,
};
pub use rng::RngSpec;
pub use simulation::{simulate_path, simulate_paths, SimulatedPath};
pub use calibration::{
    calibrate, detect_jumps, estimate_lambda, fit_mle, log_returns, select_detector,
    CalibrationConfig, CalibrationReport, Detector, DetectorConfig, JumpDetectionResult,
    LogReturnSeries, MleEstimate,
};
pub use stats::{build_report, sample_kurtosis, StylizedFactsReport};
pub use backtest::{
    classify_regime, decide_exercise, revenue_change, run_backtest_suite, BacktestConfig,
    BacktestMethod, BacktestOutcome, BacktestReport, BacktestSlot, MarketRegime, Moneyness,
};
