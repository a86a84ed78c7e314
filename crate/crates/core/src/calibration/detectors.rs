//! Outlier-based jump detectors and kurtosis-driven selection.

use serde::{Deserialize, Serialize};

use super::LogReturnSeries;
use crate::error::{Error, Result};
use crate::model::DAILY_DT;
use crate::stats::{median, quantile, sample_kurtosis, sorted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    Gc,
    Pji,
    Cobw,
    BvLm,
    Hampel,
}

impl Detector {
    pub const ALL: [Detector; 5] = [
        Detector::Gc,
        Detector::Pji,
        Detector::Cobw,
        Detector::BvLm,
        Detector::Hampel,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Detector::Gc => "gc",
            Detector::Pji => "pji",
            Detector::Cobw => "cobw",
            Detector::BvLm => "bv_lm",
            Detector::Hampel => "hampel",
        }
    }
}

impl std::fmt::Display for Detector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Detector::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param("detector", format!("unknown detector {s:?}")))
    }
}

/// Global centiles: flag returns strictly outside `[Q_q, Q_{1−q}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GcConfig {
    pub q: f64,
}

impl Default for GcConfig {
    fn default() -> Self {
        Self { q: 0.005 }
    }
}

/// Centiles over disjoint blocks. Within a block the fences are
/// `Q_q − k·(Q_{1−q} − Q_q)` and `Q_{1−q} + k·(Q_{1−q} − Q_q)`.
/// `k = 0` gives plain block centiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CobwConfig {
    /// Block length; `None` picks 24 for intraday data and 20 otherwise.
    pub block: Option<usize>,
    pub q: f64,
    pub k: f64,
    pub min_block: usize,
}

impl Default for CobwConfig {
    fn default() -> Self {
        Self {
            block: None,
            q: 0.25,
            k: 3.0,
            min_block: 5,
        }
    }
}

impl CobwConfig {
    pub fn block_len(&self, dt: f64) -> usize {
        self.block.unwrap_or(if is_intraday(dt) { 24 } else { 20 })
    }
}

/// Rolling median filter over a centered window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HampelConfig {
    pub window: usize,
    pub k: f64,
}

impl Default for HampelConfig {
    fn default() -> Self {
        Self { window: 11, k: 3.0 }
    }
}

/// Price-jump index: `|r_i|` against the mean absolute return of the
/// preceding `window` returns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PjiConfig {
    pub window: usize,
    pub k: f64,
}

impl Default for PjiConfig {
    fn default() -> Self {
        Self { window: 20, k: 4.0 }
    }
}

/// Bipower-variation jump test with a Gumbel rejection region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BvLmConfig {
    pub window: usize,
    pub significance: f64,
}

impl Default for BvLmConfig {
    fn default() -> Self {
        Self {
            window: 16,
            significance: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub gc: GcConfig,
    pub cobw: CobwConfig,
    pub hampel: HampelConfig,
    pub pji: PjiConfig,
    pub bv_lm: BvLmConfig,
}

/// The configuration a detector actually ran with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detector", rename_all = "snake_case")]
pub enum DetectorParams {
    Gc(GcConfig),
    Pji(PjiConfig),
    Cobw { block: usize, q: f64, k: f64, min_block: usize },
    BvLm(BvLmConfig),
    Hampel(HampelConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpDetectionResult {
    pub detector: Detector,
    pub jump_indices: Vec<usize>,
    pub jump_returns: Vec<f64>,
    pub params_used: DetectorParams,
}

impl JumpDetectionResult {
    pub fn count(&self) -> usize {
        self.jump_indices.len()
    }

    /// Returns with the flagged indices removed.
    pub fn residual(&self, returns: &[f64]) -> Vec<f64> {
        let mut flagged = self.jump_indices.iter().peekable();
        returns
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                if flagged.peek() == Some(&i) {
                    flagged.next();
                    false
                } else {
                    true
                }
            })
            .map(|(_, &r)| r)
            .collect()
    }
}

fn is_intraday(dt: f64) -> bool {
    dt < DAILY_DT * (1.0 - 1e-9)
}

fn check_len(n: usize, needed: usize) -> Result<()> {
    if n < needed {
        Err(Error::InsufficientData { needed, got: n })
    } else {
        Ok(())
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 0.5 {
        Ok(())
    } else {
        Err(Error::param("q", format!("centile level must lie in (0, 0.5), got {q}")))
    }
}

/// `|x| > threshold`, with a zero threshold flagging any nonzero value.
fn exceeds(x: f64, threshold: f64) -> bool {
    if threshold > 0.0 {
        x.abs() > threshold
    } else {
        x != 0.0
    }
}

fn gc(r: &[f64], cfg: &GcConfig) -> Result<Vec<usize>> {
    check_q(cfg.q)?;
    check_len(r.len(), 2)?;
    let s = sorted(r);
    let (lo, hi) = (quantile(&s, cfg.q), quantile(&s, 1.0 - cfg.q));
    Ok((0..r.len()).filter(|&i| r[i] < lo || r[i] > hi).collect())
}

fn cobw(r: &[f64], cfg: &CobwConfig, block: usize) -> Result<Vec<usize>> {
    check_q(cfg.q)?;
    if block < 2 || cfg.k < 0.0 {
        return Err(Error::param("cobw", "block must be ≥ 2 and k ≥ 0"));
    }
    let n = r.len();
    check_len(n, 2 * block)?;
    let mut starts: Vec<usize> = (0..n).step_by(block).collect();
    if n - starts[starts.len() - 1] < cfg.min_block {
        starts.pop();
    }
    let mut out = Vec::new();
    for (b, &start) in starts.iter().enumerate() {
        let end = starts.get(b + 1).copied().unwrap_or(n);
        let s = sorted(&r[start..end]);
        let (lo, hi) = (quantile(&s, cfg.q), quantile(&s, 1.0 - cfg.q));
        let spread = hi - lo;
        let (lo, hi) = (lo - cfg.k * spread, hi + cfg.k * spread);
        out.extend((start..end).filter(|&i| r[i] < lo || r[i] > hi));
    }
    Ok(out)
}

fn hampel(r: &[f64], cfg: &HampelConfig) -> Result<Vec<usize>> {
    if cfg.window < 3 || cfg.k <= 0.0 {
        return Err(Error::param("hampel", "window must be ≥ 3 and k > 0"));
    }
    let n = r.len();
    check_len(n, 2 * cfg.window)?;
    let half = cfg.window / 2;
    Ok((0..n)
        .filter(|&i| {
            let w = &r[i.saturating_sub(half)..(i + half + 1).min(n)];
            let med = median(w);
            let dev: Vec<f64> = w.iter().map(|x| (x - med).abs()).collect();
            exceeds(r[i] - med, cfg.k * 1.4826 * median(&dev))
        })
        .collect())
}

/// Indices of the `len` neighbours used as a local scale reference for
/// point `i`: the preceding ones, or the following ones near the start.
fn reference_range(i: usize, len: usize) -> std::ops::Range<usize> {
    if i >= len {
        i - len..i
    } else {
        i + 1..i + 1 + len
    }
}

fn pji(r: &[f64], cfg: &PjiConfig) -> Result<Vec<usize>> {
    if cfg.window < 1 || cfg.k <= 0.0 {
        return Err(Error::param("pji", "window must be ≥ 1 and k > 0"));
    }
    let n = r.len();
    check_len(n, 2 * cfg.window)?;
    Ok((0..n)
        .filter(|&i| {
            let range = reference_range(i, cfg.window);
            let scale = r[range].iter().map(|x| x.abs()).sum::<f64>() / cfg.window as f64;
            exceeds(r[i], cfg.k * scale)
        })
        .collect())
}

/// Location and scale of the maximum of `n` absolute standardized returns.
fn gumbel_constants(n: usize) -> (f64, f64) {
    let c = (2.0 / std::f64::consts::PI).sqrt();
    let ln_n = (n as f64).ln();
    let root = (2.0 * ln_n).sqrt();
    let cn = root / c - (std::f64::consts::PI.ln() + ln_n.ln()) / (2.0 * c * root);
    let sn = 1.0 / (c * root);
    (cn, sn)
}

fn bv_lm(r: &[f64], cfg: &BvLmConfig, dt: f64) -> Result<Vec<usize>> {
    if !is_intraday(dt) {
        return Err(Error::DetectorUnavailable("bv_lm"));
    }
    if cfg.window < 4 || !(cfg.significance > 0.0 && cfg.significance < 1.0) {
        return Err(Error::param("bv_lm", "window must be ≥ 4 and significance in (0, 1)"));
    }
    let n = r.len();
    check_len(n, 2 * cfg.window)?;
    let products = cfg.window - 2;
    // prod[j] = |r_{j+1}| |r_j|
    let prod: Vec<f64> = r.windows(2).map(|w| w[0].abs() * w[1].abs()).collect();
    let (cn, sn) = gumbel_constants(n);
    let critical = -(-(1.0 - cfg.significance).ln()).ln();
    Ok((0..n)
        .filter(|&i| {
            // products strictly before i, or strictly after it near the start
            let range = if i > products {
                i - products - 1..i - 1
            } else {
                i + 1..i + 1 + products
            };
            let bv = prod[range].iter().sum::<f64>() / products as f64;
            if bv <= 0.0 {
                return r[i] != 0.0;
            }
            (r[i].abs() / bv.sqrt() - cn) / sn > critical
        })
        .collect())
}

pub fn detect_jumps(
    returns: &LogReturnSeries,
    detector: Detector,
    config: &DetectorConfig,
) -> Result<JumpDetectionResult> {
    let r = returns.returns();
    let (jump_indices, params_used) = match detector {
        Detector::Gc => (gc(r, &config.gc)?, DetectorParams::Gc(config.gc)),
        Detector::Cobw => {
            let block = config.cobw.block_len(returns.dt());
            (
                cobw(r, &config.cobw, block)?,
                DetectorParams::Cobw {
                    block,
                    q: config.cobw.q,
                    k: config.cobw.k,
                    min_block: config.cobw.min_block,
                },
            )
        }
        Detector::Hampel => (hampel(r, &config.hampel)?, DetectorParams::Hampel(config.hampel)),
        Detector::Pji => (pji(r, &config.pji)?, DetectorParams::Pji(config.pji)),
        Detector::BvLm => (
            bv_lm(r, &config.bv_lm, returns.dt())?,
            DetectorParams::BvLm(config.bv_lm),
        ),
    };
    let jump_returns = jump_indices.iter().map(|&i| r[i]).collect();
    Ok(JumpDetectionResult {
        detector,
        jump_indices,
        jump_returns,
        params_used,
    })
}

pub const MIN_SELECTION_OBS: usize = 30;
pub const KURTOSIS_BAND: (f64, f64) = (2.0, 4.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorDiagnostics {
    pub detector: Detector,
    pub flagged: usize,
    pub residual_kurtosis: f64,
    pub in_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorSelection {
    pub selected: Detector,
    pub detection: JumpDetectionResult,
    pub raw_kurtosis: f64,
    pub diagnostics: Vec<DetectorDiagnostics>,
    /// Detectors skipped because they do not apply to this sampling rate.
    pub unavailable: Vec<Detector>,
}

impl DetectorSelection {
    pub fn residual_kurtosis(&self) -> f64 {
        self.diagnostics
            .iter()
            .find(|d| d.detector == self.selected)
            .map(|d| d.residual_kurtosis)
            .expect("selected detector has diagnostics")
    }
}

/// Runs each detector, removes its flags and keeps the one whose residual
/// kurtosis is closest to 3. Ties go to the detector with fewer flags,
/// then to the earlier entry of `detectors`.
pub fn select_detector(
    returns: &LogReturnSeries,
    detectors: &[Detector],
    config: &DetectorConfig,
) -> Result<DetectorSelection> {
    let r = returns.returns();
    check_len(r.len(), MIN_SELECTION_OBS)?;
    let raw_kurtosis = sample_kurtosis(r)?;
    let mut diagnostics = Vec::new();
    let mut unavailable = Vec::new();
    let mut best: Option<(f64, usize, JumpDetectionResult)> = None;
    for &d in detectors {
        let detection = match detect_jumps(returns, d, config) {
            Ok(det) => det,
            Err(Error::DetectorUnavailable(_)) => {
                unavailable.push(d);
                continue;
            }
            Err(e) => return Err(e),
        };
        let k = sample_kurtosis(&detection.residual(r))?;
        diagnostics.push(DetectorDiagnostics {
            detector: d,
            flagged: detection.count(),
            residual_kurtosis: k,
            in_band: (KURTOSIS_BAND.0..=KURTOSIS_BAND.1).contains(&k),
        });
        let gap = (k - 3.0).abs();
        let better = match &best {
            None => true,
            Some((g, c, _)) => gap < *g || (gap == *g && detection.count() < *c),
        };
        if better {
            best = Some((gap, detection.count(), detection));
        }
    }
    let (_, _, detection) = best.ok_or_else(|| {
        Error::param("detectors", "no applicable detector for this series")
    })?;
    Ok(DetectorSelection {
        selected: detection.detector,
        detection,
        raw_kurtosis,
        diagnostics,
        unavailable,
    })
}

pub const MAX_JUMP_PROBABILITY_ESTIMATE: f64 = 0.5;

/// Jump intensity per year from a detection, capped so `λ·dt ≤ 0.5`.
pub fn estimate_lambda(detection: &JumpDetectionResult, n_obs: usize, dt: f64) -> f64 {
    if n_obs == 0 || dt <= 0.0 {
        return 0.0;
    }
    let lambda = detection.count() as f64 / (n_obs as f64 * dt);
    lambda.min(MAX_JUMP_PROBABILITY_ESTIMATE / dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JumpDiffusionParams, JumpSizeDistribution, HOURLY_DT};
    use crate::rng::RngSpec;
    use crate::simulation::simulate_history;
    use crate::stats::tests_support::gaussian;
    use proptest::prelude::*;

    fn series(r: Vec<f64>, dt: f64) -> LogReturnSeries {
        LogReturnSeries::new(r, dt).unwrap()
    }

    fn merton_returns(seed: u64, n: usize, lambda_dt: f64, alpha: f64, beta: f64) -> (LogReturnSeries, Vec<usize>) {
        let dt = DAILY_DT;
        let params = JumpDiffusionParams::real_world(
            0.0,
            0.2,
            lambda_dt / dt,
            JumpSizeDistribution::LogNormal { alpha, beta },
        )
        .unwrap();
        let (prices, jumps) = simulate_history(1.0, &params, dt, n + 1, RngSpec::new(seed, 0)).unwrap();
        (super::super::log_returns(&prices), jumps)
    }

    #[test]
    fn single_spike_flagged_by_every_detector() {
        let mut r = vec![0.0; 120];
        r[57] = 10.0;
        let s = series(r, HOURLY_DT);
        for d in Detector::ALL {
            let det = detect_jumps(&s, d, &DetectorConfig::default()).unwrap();
            assert_eq!(det.jump_indices, vec![57], "{d}");
            assert_eq!(det.jump_returns, vec![10.0]);
        }
    }

    #[test]
    fn bv_lm_needs_intraday_data() {
        let s = series(gaussian(200, 1), DAILY_DT);
        assert!(matches!(
            detect_jumps(&s, Detector::BvLm, &DetectorConfig::default()),
            Err(Error::DetectorUnavailable(_))
        ));
    }

    #[test]
    fn global_centiles_on_gaussian_noise() {
        for seed in 0..20 {
            let s = series(gaussian(500, seed).iter().map(|x| 0.01 * x).collect(), DAILY_DT);
            let det = detect_jumps(&s, Detector::Gc, &DetectorConfig::default()).unwrap();
            assert!(det.count() as f64 <= 0.03 * 500.0, "seed {seed}: {}", det.count());
        }
    }

    #[test]
    fn cobw_recovers_simulated_jumps() {
        for seed in 0..10 {
            let (s, truth) = merton_returns(seed, 2000, 0.02, 0.2, 0.05);
            let det = detect_jumps(&s, Detector::Cobw, &DetectorConfig::default()).unwrap();
            let hits = det.jump_indices.iter().filter(|i| truth.contains(i)).count();
            let recall = hits as f64 / truth.len() as f64;
            let precision = hits as f64 / det.count().max(1) as f64;
            assert!(recall >= 0.9 && precision >= 0.5, "seed {seed}: {recall} {precision}");
        }
    }

    #[test]
    fn windowed_detectors_need_enough_data() {
        let s = series(gaussian(30, 1), DAILY_DT);
        assert!(matches!(
            detect_jumps(&s, Detector::Cobw, &DetectorConfig::default()),
            Err(Error::InsufficientData { needed: 40, got: 30 })
        ));
    }

    #[test]
    fn trailing_short_block_merges() {
        let cfg = CobwConfig { block: Some(10), ..Default::default() };
        let mut r: Vec<f64> = gaussian(23, 4);
        r[22] = 50.0;
        // the last three points join the second block
        let flagged = cobw(&r, &cfg, 10).unwrap();
        assert_eq!(flagged, vec![22]);
    }

    #[test]
    fn selection_on_gaussian_data_prefers_few_flags() {
        let s = series(gaussian(2000, 8).iter().map(|x| 0.01 * x).collect(), DAILY_DT);
        let sel = select_detector(&s, &Detector::ALL, &DetectorConfig::default()).unwrap();
        assert_eq!(sel.unavailable, vec![Detector::BvLm]);
        assert_eq!(sel.diagnostics.len(), 4);
        for d in &sel.diagnostics {
            assert!((d.residual_kurtosis - 3.0).abs() < 0.5, "{d:?}");
        }
        let min_gap = sel
            .diagnostics
            .iter()
            .map(|d| (d.residual_kurtosis - 3.0).abs())
            .fold(f64::INFINITY, f64::min);
        assert_eq!((sel.residual_kurtosis() - 3.0).abs(), min_gap);
    }

    #[test]
    fn selection_tie_goes_to_fewest_flags() {
        // identical residuals for every detector when none flags anything
        let r: Vec<f64> = (0..100).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let s = series(r, DAILY_DT);
        let sel = select_detector(&s, &[Detector::Pji, Detector::Gc], &DetectorConfig::default()).unwrap();
        let counts: Vec<usize> = sel.diagnostics.iter().map(|d| d.flagged).collect();
        assert_eq!(sel.detection.count(), *counts.iter().min().unwrap());
    }

    #[test]
    fn selection_on_heavy_jumps_restores_normal_kurtosis() {
        let (s, _) = merton_returns(3, 2000, 0.02, 0.0, 0.1);
        let sel = select_detector(&s, &Detector::ALL, &DetectorConfig::default()).unwrap();
        assert!(sel.raw_kurtosis > 6.0, "{}", sel.raw_kurtosis);
        assert!((2.0..=4.0).contains(&sel.residual_kurtosis()), "{sel:?}");
    }

    #[test]
    fn selection_needs_thirty_points() {
        let s = series(gaussian(10, 1), DAILY_DT);
        assert!(matches!(
            select_detector(&s, &Detector::ALL, &DetectorConfig::default()),
            Err(Error::InsufficientData { needed: 30, got: 10 })
        ));
    }

    #[test]
    fn lambda_estimates() {
        let det = |n: usize| JumpDetectionResult {
            detector: Detector::Gc,
            jump_indices: (0..n).collect(),
            jump_returns: vec![0.0; n],
            params_used: DetectorParams::Gc(GcConfig::default()),
        };
        assert_eq!(estimate_lambda(&det(0), 60, DAILY_DT), 0.0);
        assert!((estimate_lambda(&det(3), 60, 1.0 / 365.0) - 18.25).abs() < 1e-12);
        assert!((estimate_lambda(&det(50), 60, DAILY_DT) * DAILY_DT - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lambda_recovered_from_simulated_jumps() {
        for seed in 0..10 {
            let (s, _) = merton_returns(100 + seed, 2000, 10.0 * DAILY_DT, 0.3, 0.05);
            let det = detect_jumps(&s, Detector::Cobw, &DetectorConfig::default()).unwrap();
            let lambda = estimate_lambda(&det, s.len(), s.dt());
            assert!((lambda - 10.0).abs() <= 4.0, "seed {seed}: {lambda}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn scale_equivariant(seed in 0u64..1000, scale in 1e-3f64..1e3) {
            let (s, _) = merton_returns(seed, 300, 0.03, 0.1, 0.05);
            let scaled = series(s.returns().iter().map(|x| x * scale).collect(), s.dt());
            for d in [Detector::Gc, Detector::Cobw, Detector::Hampel] {
                let a = detect_jumps(&s, d, &DetectorConfig::default()).unwrap();
                let b = detect_jumps(&scaled, d, &DetectorConfig::default()).unwrap();
                prop_assert_eq!(a.jump_indices, b.jump_indices);
            }
        }
    }
}
