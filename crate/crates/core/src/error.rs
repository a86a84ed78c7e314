use thiserror::Error;

/// Errors raised by the pricing, calibration and diagnostics routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid jump-size distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("degenerate averaging window: S = T requires m = 1 (got m = {m})")]
    DegenerateWindow { m: usize },

    #[error("pricing requires risk-neutral parameters, got real-world drift")]
    RealWorldMeasure,

    #[error("jump probability per step λΔt = {0} must be < 1")]
    JumpProbabilityTooLarge(f64),

    #[error("window length {got} does not match averaging count {expected}")]
    WindowLength { expected: usize, got: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("series did not converge after {terms} terms")]
    SeriesNotConverged { terms: usize },

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("sample size {got} outside supported range [{min}, {max}]")]
    SampleSizeOutOfRange { min: usize, max: usize, got: usize },

    #[error("zero variance: {0}")]
    ZeroVariance(&'static str),

    #[error("optimizer did not converge (best log-likelihood {best_log_likelihood})")]
    NotConverged {
        best_log_likelihood: f64,
        best_point: Vec<f64>,
    },

    #[error("degenerate diffusion variance: σ√Δt = {0:e} below 1e-8")]
    DegenerateVariance(f64),

    #[error("revenue ratio undefined: auction revenue is zero")]
    UndefinedRevenueRatio,

    #[error("invalid price series: {0}")]
    InvalidSeries(String),

    #[error("detector {0} is unavailable at this sampling frequency")]
    DetectorUnavailable(&'static str),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
