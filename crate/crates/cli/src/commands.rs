//! The five pipelines. Each writes `<command>.json` plus tabular artifacts.

use std::path::{Path, PathBuf};

use adopt_core::calibration::{log_returns, select_detector};
use adopt_core::pricing::PricingInputs;
use adopt_core::simulation::simulate_paths;
use adopt_core::stats::build_report;
use adopt_core::{
    build_time_grid, calibrate as calibrate_series, closed_form_price, mc_price, run_backtest_suite,
    BacktestReport, BacktestSlot, CalibrationReport, Detector, Error, PriceSeries, PricingResult,
    RngSpec, StylizedFactsReport,
};
use serde::Serialize;

use crate::config::{PricingChoice, RunConfig};
use crate::error::{CliError, CliResult};
use crate::ingest::ingest_csv;
use crate::output::{ensure_dir, write_json, write_table, Report};
use crate::Format;

fn load_inputs(cfg: &RunConfig) -> CliResult<Vec<(String, PriceSeries)>> {
    if cfg.input.is_empty() {
        return Err(CliError::Config("no --input given".into()));
    }
    cfg.input
        .iter()
        .map(|p| Ok((p.display().to_string(), ingest_csv(p)?)))
        .collect()
}

#[derive(Debug, Serialize)]
struct PathRow {
    replication: usize,
    step: usize,
    time: f64,
    price: f64,
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub paths: usize,
    pub dt: f64,
    pub warmup_steps: usize,
    pub window_steps: usize,
    pub terminal_prices: Vec<f64>,
    pub jump_counts: Vec<u32>,
}

pub fn simulate(cfg: &RunConfig, out: &Path, format: Format) -> CliResult<Vec<PathBuf>> {
    let params = cfg.params()?;
    let spec = cfg.option_spec(cfg.time_scale.dt())?;
    let grid = build_time_grid(&spec)?;
    let paths = simulate_paths(
        cfg.model.x0,
        &params,
        &grid,
        cfg.simulate.paths,
        RngSpec::new(cfg.seed, 0),
    )?;
    let mut rows = Vec::new();
    for (j, path) in paths.iter().enumerate() {
        rows.push(PathRow {
            replication: j + 1,
            step: 0,
            time: 0.0,
            price: path.x0,
        });
        rows.extend(path.prices().into_iter().enumerate().map(|(i, price)| PathRow {
            replication: j + 1,
            step: i + 1,
            time: grid.time(i + 1),
            price,
        }));
    }
    let summary = SimulateSummary {
        paths: paths.len(),
        dt: grid.dt(),
        warmup_steps: grid.warmup_steps(),
        window_steps: grid.window_steps(),
        terminal_prices: paths.iter().map(|p| p.terminal_price()).collect(),
        jump_counts: paths.iter().map(|p| p.jump_count()).collect(),
    };
    ensure_dir(out)?;
    let report = Report {
        command: "simulate",
        config: cfg,
        result: summary,
    };
    Ok(vec![
        write_json(out, "simulate.json", &report)?,
        write_table(out, "paths", &rows, format)?,
    ])
}

/// Flat pricing record echoing its inputs.
#[derive(Debug, Clone, Serialize)]
pub struct PriceRecord {
    #[serde(flatten)]
    pub result: PricingResult,
    pub inputs: PricingInputs,
}

#[derive(Debug, Serialize)]
pub struct PriceSummary {
    pub monte_carlo: Option<PriceRecord>,
    pub closed_form: Option<PriceRecord>,
    /// Why the closed form was skipped, if it was.
    pub closed_form_note: Option<String>,
    /// Whether the closed form lies in the Monte Carlo 95% interval.
    pub closed_form_in_ci: Option<bool>,
}

pub fn price(cfg: &RunConfig, out: &Path, format: Format) -> CliResult<Vec<PathBuf>> {
    let params = cfg.params()?;
    let spec = cfg.option_spec(cfg.time_scale.dt())?;
    let inputs = PricingInputs {
        x0: cfg.model.x0,
        params,
        spec,
    };
    let record = |result| PriceRecord { result, inputs };
    let method = cfg.pricing.method;

    let monte_carlo = match method {
        PricingChoice::ClosedForm => None,
        _ => Some(record(mc_price(inputs.x0, &params, &spec, &cfg.mc_config())?)),
    };
    let (closed_form, closed_form_note) = match method {
        PricingChoice::MonteCarlo => (None, None),
        _ => match closed_form_price(inputs.x0, &params, &spec, cfg.pricing.k_max) {
            Ok(r) => (Some(record(r)), None),
            Err(e @ Error::Unsupported(_)) if method == PricingChoice::Both => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        },
    };
    let closed_form_in_ci = match (&monte_carlo, &closed_form) {
        (Some(mc), Some(cf)) => Some(mc.result.contains(cf.result.pi0)),
        _ => None,
    };
    let rows: Vec<PricingResult> = monte_carlo
        .iter()
        .chain(closed_form.iter())
        .map(|r| r.result)
        .collect();
    let summary = PriceSummary {
        monte_carlo,
        closed_form,
        closed_form_note,
        closed_form_in_ci,
    };
    ensure_dir(out)?;
    let report = Report {
        command: "price",
        config: cfg,
        result: summary,
    };
    Ok(vec![
        write_json(out, "price.json", &report)?,
        write_table(out, "prices", &rows, format)?,
    ])
}

#[derive(Debug, Serialize)]
pub struct InputCalibration {
    pub input: String,
    pub report: CalibrationReport,
}

#[derive(Debug, Serialize)]
struct DetectorRow {
    input: String,
    detector: Detector,
    flagged: usize,
    residual_kurtosis: f64,
    in_band: bool,
    selected: bool,
}

pub fn calibrate(cfg: &RunConfig, out: &Path, format: Format) -> CliResult<Vec<PathBuf>> {
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for (input, series) in load_inputs(cfg)? {
        let report = calibrate_series(&series, &cfg.calibration)?;
        rows.extend(report.detectors.iter().map(|d| DetectorRow {
            input: input.clone(),
            detector: d.detector,
            flagged: d.flagged,
            residual_kurtosis: d.residual_kurtosis,
            in_band: d.in_band,
            selected: d.detector == report.selected_detector,
        }));
        results.push(InputCalibration { input, report });
    }
    ensure_dir(out)?;
    let report = Report {
        command: "calibrate",
        config: cfg,
        result: results,
    };
    Ok(vec![
        write_json(out, "calibrate.json", &report)?,
        write_table(out, "detectors", &rows, format)?,
    ])
}

#[derive(Debug, Serialize)]
pub struct InputFacts {
    pub input: String,
    /// The selected detector flags at least one jump.
    pub jumps_present: bool,
    pub selected_detector: Detector,
    pub report: StylizedFactsReport,
}

#[derive(Debug, Serialize)]
struct FactRow {
    input: String,
    metric: String,
    value: String,
}

pub fn facts(cfg: &RunConfig, out: &Path, format: Format) -> CliResult<Vec<PathBuf>> {
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for (input, series) in load_inputs(cfg)? {
        let returns = log_returns(&series);
        let report = build_report(returns.returns(), cfg.facts.alpha)?;
        let selection = select_detector(
            &returns,
            &cfg.calibration.detectors,
            &cfg.calibration.detector_config,
        )?;
        let jumps_present = selection.detection.count() > 0;
        rows.push(FactRow {
            input: input.clone(),
            metric: "jumps_present".into(),
            value: jumps_present.to_string(),
        });
        rows.extend(report.rows().into_iter().map(|(metric, value)| FactRow {
            input: input.clone(),
            metric,
            value,
        }));
        results.push(InputFacts {
            input,
            jumps_present,
            selected_detector: selection.selected,
            report,
        });
    }
    ensure_dir(out)?;
    let report = Report {
        command: "facts",
        config: cfg,
        result: results,
    };
    Ok(vec![
        write_json(out, "facts.json", &report)?,
        write_table(out, "facts", &rows, format)?,
    ])
}

#[derive(Debug, Serialize)]
struct OutcomeRow<'a> {
    slot: &'a str,
    regime: adopt_core::MarketRegime,
    moneyness: adopt_core::Moneyness,
    method: adopt_core::BacktestMethod,
    exercised: bool,
    pi0: f64,
    revenue_change: f64,
}

pub fn backtest(cfg: &RunConfig, out: &Path, format: Format) -> CliResult<Vec<PathBuf>> {
    let slots: Vec<BacktestSlot> = load_inputs(cfg)?
        .into_iter()
        .map(|(name, series)| BacktestSlot { name, series })
        .collect();
    let result: BacktestReport = run_backtest_suite(&slots, &cfg.backtest_config())?;
    let rows: Vec<OutcomeRow> = result
        .outcomes
        .iter()
        .map(|o| OutcomeRow {
            slot: &o.slot,
            regime: o.regime,
            moneyness: o.moneyness,
            method: o.method,
            exercised: o.exercised,
            pi0: o.pi0,
            revenue_change: o.revenue_change,
        })
        .collect();
    ensure_dir(out)?;
    let outcomes = write_table(out, "backtest", &rows, format)?;
    let aggregates = write_table(out, "backtest_summary", &result.aggregates, format)?;
    let report = Report {
        command: "backtest",
        config: cfg,
        result: &result,
    };
    Ok(vec![write_json(out, "backtest.json", &report)?, outcomes, aggregates])
}
