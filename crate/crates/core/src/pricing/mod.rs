//! Option valuation: Monte Carlo over simulated paths, the explicit
//! geometric-average formula for log-normal jumps, and its European (Merton)
//! special case.

mod closed_form;
mod monte_carlo;
mod sensitivity;

use serde::{Deserialize, Serialize};

pub use closed_form::{
    closed_form_price, closed_form_terms, merton_european_price, ClosedFormTerm, ClosedFormTerms,
    DEFAULT_K_MAX, POISSON_WEIGHT_CUTOFF,
};
pub use monte_carlo::{mc_price, McConfig, CHUNK_SIZE};
pub use sensitivity::{price_sensitivities, Direction, Pricer, Sensitivity, SensitivityParameter};

use crate::error::Result;
use crate::model::{JumpDiffusionParams, OptionSpec};

/// 97.5% standard normal quantile used for the two-sided 95% interval.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PricingMethod {
    MonteCarlo,
    ClosedForm,
}

/// Price `π₀` with its Monte Carlo error band (zero width for closed forms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingResult {
    pub method: PricingMethod,
    pub pi0: f64,
    pub std_error: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    /// Number of replications `z` (0 for closed forms).
    pub z: u64,
}

impl PricingResult {
    pub fn closed_form(pi0: f64) -> Self {
        Self {
            method: PricingMethod::ClosedForm,
            pi0,
            std_error: 0.0,
            ci95_low: pi0,
            ci95_high: pi0,
            z: 0,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci95_low <= value && value <= self.ci95_high
    }
}

/// Everything needed to value one contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingInputs {
    pub x0: f64,
    pub params: JumpDiffusionParams,
    pub spec: OptionSpec,
}

impl Pricer {
    pub fn price(&self, inputs: &PricingInputs) -> Result<PricingResult> {
        match self {
            Pricer::ClosedForm { k_max } => {
                closed_form_price(inputs.x0, &inputs.params, &inputs.spec, *k_max)
            }
            Pricer::MonteCarlo(cfg) => mc_price(inputs.x0, &inputs.params, &inputs.spec, cfg),
        }
    }
}
