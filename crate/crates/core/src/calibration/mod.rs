//! Calibration of the jump-diffusion from an observed price history.

mod detectors;
mod mle;
pub mod optim;

use serde::{Deserialize, Serialize};

pub use detectors::{
    detect_jumps, estimate_lambda, select_detector, BvLmConfig, CobwConfig, Detector,
    DetectorConfig, DetectorDiagnostics, DetectorParams, DetectorSelection, GcConfig,
    HampelConfig, JumpDetectionResult, PjiConfig, KURTOSIS_BAND, MAX_JUMP_PROBABILITY_ESTIMATE,
    MIN_SELECTION_OBS,
};
pub use mle::{
    fit_mle, fit_mle_with, log_likelihood_at, mixture_log_likelihood, MleConfig, MleEstimate,
    MIN_DIFFUSION_SCALE, MIN_MLE_OBS,
};

use crate::error::{Error, Result};
use crate::model::PriceSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogReturnSeries {
    returns: Vec<f64>,
    dt: f64,
}

impl LogReturnSeries {
    pub fn new(returns: Vec<f64>, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        if let Some(i) = returns.iter().position(|r| !r.is_finite()) {
            return Err(Error::InvalidSeries(format!("return {i} is not finite")));
        }
        Ok(Self { returns, dt })
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// `ln X(t+Δt) − ln X(t)` for consecutive observations.
pub fn log_returns(series: &PriceSeries) -> LogReturnSeries {
    let logs: Vec<f64> = series.prices().iter().map(|p| p.ln()).collect();
    LogReturnSeries {
        returns: logs.windows(2).map(|w| w[1] - w[0]).collect(),
        dt: series.dt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub detectors: Vec<Detector>,
    pub detector_config: DetectorConfig,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            detectors: Detector::ALL.to_vec(),
            detector_config: DetectorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub n_obs: usize,
    pub dt: f64,
    pub raw_kurtosis: f64,
    pub detectors: Vec<DetectorDiagnostics>,
    pub unavailable_detectors: Vec<Detector>,
    /// How many detectors leave a residual kurtosis in `[2, 4]`.
    pub detectors_in_band: usize,
    pub selected_detector: Detector,
    pub jump_indices: Vec<usize>,
    pub jumps_present: bool,
    pub lambda_hat: f64,
    pub mle: MleEstimate,
}

/// Detector selection, intensity estimate, then the mixture fit on the raw
/// returns with that intensity held fixed.
pub fn calibrate(series: &PriceSeries, config: &CalibrationConfig) -> Result<CalibrationReport> {
    let returns = log_returns(series);
    let selection = select_detector(&returns, &config.detectors, &config.detector_config)?;
    let lambda_hat = estimate_lambda(&selection.detection, returns.len(), returns.dt());
    let mle = fit_mle(&returns, lambda_hat)?;
    Ok(CalibrationReport {
        n_obs: returns.len(),
        dt: returns.dt(),
        raw_kurtosis: selection.raw_kurtosis,
        detectors_in_band: selection.diagnostics.iter().filter(|d| d.in_band).count(),
        detectors: selection.diagnostics,
        unavailable_detectors: selection.unavailable,
        selected_detector: selection.selected,
        jumps_present: !selection.detection.jump_indices.is_empty(),
        jump_indices: selection.detection.jump_indices,
        lambda_hat,
        mle,
    })
}
