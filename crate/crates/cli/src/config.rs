//! Run configuration: defaults, overridden by a TOML file, overridden by flags.

use std::path::{Path, PathBuf};

use adopt_core::backtest::BacktestMethod;
use adopt_core::calibration::CalibrationConfig;
use adopt_core::pricing::DEFAULT_K_MAX;
use adopt_core::{
    BacktestConfig, JumpDiffusionParams, JumpSizeDistribution, McConfig, MeanExponent, Moneyness,
    OptionSpec, DAILY_DT, HOURLY_DT,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScale {
    Daily,
    Hourly,
}

impl TimeScale {
    pub fn dt(&self) -> f64 {
        match self {
            TimeScale::Daily => DAILY_DT,
            TimeScale::Hourly => HOURLY_DT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub x0: f64,
    pub rate: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub jumps: JumpSizeDistribution,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            x0: 1.0,
            rate: 0.1,
            sigma: 0.2,
            lambda: 5.0,
            jumps: JumpSizeDistribution::LogNormal {
                alpha: 0.1,
                beta: 0.2,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptionConfig {
    pub theta: u64,
    /// Absolute exercise price; takes precedence over `strike_factor`.
    pub strike: Option<f64>,
    /// Exercise price as a multiple of `x0`.
    pub strike_factor: f64,
    pub ctr_buyer: f64,
    pub ctr_market: f64,
    /// Steps from pricing time to the start of the averaging window (`m̃`).
    pub warmup_steps: usize,
    /// Averaging observations (`m`).
    pub window_steps: usize,
    pub gamma: MeanExponent,
}

impl Default for OptionConfig {
    fn default() -> Self {
        Self {
            theta: 1,
            strike: None,
            strike_factor: 0.75,
            ctr_buyer: 0.2,
            ctr_market: 0.2,
            warmup_steps: 30,
            window_steps: 30,
            gamma: MeanExponent::GEOMETRIC,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PricingChoice {
    Both,
    MonteCarlo,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PricingConfig {
    pub method: PricingChoice,
    /// Monte Carlo replications `z`.
    pub paths: u64,
    pub substeps: usize,
    pub k_max: usize,
}

impl Default for PricingConfig {
    fn default() -> Self {
        Self {
            method: PricingChoice::Both,
            paths: 100_000,
            substeps: 1,
            k_max: DEFAULT_K_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub paths: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { paths: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactsConfig {
    pub alpha: f64,
}

impl Default for FactsConfig {
    fn default() -> Self {
        Self { alpha: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestSection {
    pub methods: Vec<BacktestMethod>,
    pub moneyness: Vec<Moneyness>,
    pub ade: JumpSizeDistribution,
    pub laplacian: JumpSizeDistribution,
}

impl Default for BacktestSection {
    fn default() -> Self {
        let d = BacktestConfig::default();
        Self {
            methods: d.methods,
            moneyness: d.moneyness,
            ade: d.ade,
            laplacian: d.laplacian,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Vec<PathBuf>,
    /// Sampling interval when no input file fixes it.
    pub time_scale: TimeScale,
    pub seed: u64,
    pub model: ModelConfig,
    pub option: OptionConfig,
    pub pricing: PricingConfig,
    pub simulate: SimulateConfig,
    pub calibration: CalibrationConfig,
    pub facts: FactsConfig,
    pub backtest: BacktestSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: Vec::new(),
            time_scale: TimeScale::Daily,
            seed: 0,
            model: ModelConfig::default(),
            option: OptionConfig::default(),
            pricing: PricingConfig::default(),
            simulate: SimulateConfig::default(),
            calibration: CalibrationConfig::default(),
            facts: FactsConfig::default(),
            backtest: BacktestSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn params(&self) -> CliResult<JumpDiffusionParams> {
        let m = &self.model;
        Ok(JumpDiffusionParams::risk_neutral(m.rate, m.sigma, m.lambda, m.jumps)?)
    }

    pub fn strike(&self) -> f64 {
        self.option
            .strike
            .unwrap_or(self.option.strike_factor * self.model.x0)
    }

    pub fn option_spec(&self, dt: f64) -> CliResult<OptionSpec> {
        let o = &self.option;
        let spec = OptionSpec {
            theta: o.theta,
            strike: self.strike(),
            ctr_buyer: o.ctr_buyer,
            ctr_market: o.ctr_market,
            start: o.warmup_steps as f64 * dt,
            expiry: (o.warmup_steps + o.window_steps) as f64 * dt,
            m: o.window_steps,
            gamma: o.gamma,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn mc_config(&self) -> McConfig {
        McConfig::new(self.pricing.paths, self.seed).with_substeps(self.pricing.substeps)
    }

    pub fn backtest_config(&self) -> BacktestConfig {
        let o = &self.option;
        BacktestConfig {
            warmup_steps: o.warmup_steps,
            window_steps: o.window_steps,
            rate: self.model.rate,
            theta: o.theta,
            ctr_buyer: o.ctr_buyer,
            ctr_market: o.ctr_market,
            gamma: o.gamma,
            methods: self.backtest.methods.clone(),
            moneyness: self.backtest.moneyness.clone(),
            mc: self.mc_config(),
            k_max: self.pricing.k_max,
            ade: self.backtest.ade,
            laplacian: self.backtest.laplacian,
            calibration: self.calibration.clone(),
        }
    }
}
