//! CSV price histories with a `timestamp,price` header.

use std::path::{Path, PathBuf};

use adopt_core::PriceSeries;
use chrono::{DateTime, NaiveDate, NaiveDateTime};
use thiserror::Error;

const SECONDS_PER_YEAR: f64 = 365.0 * 86_400.0;
const SPACING_RTOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: expected header `timestamp,price`, found `{found}`")]
    Header { path: PathBuf, found: String },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("{path}:{line}: price {price} is not positive")]
    NonPositivePrice { path: PathBuf, line: u64, price: f64 },

    #[error("{path}:{line}: non-uniform spacing, gap of {gap} s where {expected} s was expected")]
    NonUniformSpacing {
        path: PathBuf,
        line: u64,
        gap: f64,
        expected: f64,
    },

    #[error("{path}: need at least 2 rows, got {rows}")]
    TooShort { path: PathBuf, rows: usize },

    #[error("{path}: {source}")]
    Series {
        path: PathBuf,
        #[source]
        source: adopt_core::Error,
    },
}

/// Seconds since the epoch from epoch seconds or an ISO-8601 date/time
/// (UTC unless an offset is given).
pub fn parse_timestamp(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(seconds(t.timestamp(), t.timestamp_subsec_nanos()));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            let t = t.and_utc();
            return Some(seconds(t.timestamp(), t.timestamp_subsec_nanos()));
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp() as f64)
}

fn seconds(secs: i64, nanos: u32) -> f64 {
    secs as f64 + nanos as f64 * 1e-9
}

/// Reads a uniformly spaced price history. Timestamps are stored in years
/// since the first row.
pub fn ingest_csv(path: &Path) -> Result<PriceSeries, IngestError> {
    let p = || path.to_path_buf();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| IngestError::Io {
            path: p(),
            source: std::io::Error::other(e.to_string()),
        })?;
    let header = reader
        .headers()
        .map_err(|e| IngestError::Parse {
            path: p(),
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    if header.len() != 2 || &header[0] != "timestamp" || &header[1] != "price" {
        return Err(IngestError::Header {
            path: p(),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut stamps: Vec<f64> = Vec::new();
    let mut prices = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Parse {
            path: p(),
            line: e.position().map_or(0, |pos| pos.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |pos| pos.line());
        let parse_err = |reason: String| IngestError::Parse {
            path: p(),
            line,
            reason,
        };
        let t = parse_timestamp(&record[0])
            .ok_or_else(|| parse_err(format!("unrecognized timestamp `{}`", &record[0])))?;
        let price: f64 = record[1]
            .parse()
            .map_err(|_| parse_err(format!("price `{}` is not a number", &record[1])))?;
        if !(price > 0.0 && price.is_finite()) {
            return Err(IngestError::NonPositivePrice { path: p(), line, price });
        }
        if stamps.len() >= 2 {
            let expected = stamps[1] - stamps[0];
            let gap = t - stamps[stamps.len() - 1];
            if (gap - expected).abs() > SPACING_RTOL * expected.abs() {
                return Err(IngestError::NonUniformSpacing {
                    path: p(),
                    line,
                    gap,
                    expected,
                });
            }
        } else if stamps.len() == 1 && t <= stamps[0] {
            return Err(parse_err("timestamps must increase".into()));
        }
        stamps.push(t);
        prices.push(price);
    }
    if prices.len() < 2 {
        return Err(IngestError::TooShort {
            path: p(),
            rows: prices.len(),
        });
    }
    let t0 = stamps[0];
    let years = stamps.iter().map(|t| (t - t0) / SECONDS_PER_YEAR).collect();
    PriceSeries::new(years, prices).map_err(|source| IngestError::Series { path: p(), source })
}
