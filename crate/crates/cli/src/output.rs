//! Report and artifact writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::Format;

/// Top-level JSON document of every command.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub result: T,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("cannot serialize {name}: {e}")))?;
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

/// Writes `rows` as `<stem>.csv` or `<stem>.json`.
pub fn write_table<T: Serialize>(dir: &Path, stem: &str, rows: &[T], format: Format) -> CliResult<PathBuf> {
    match format {
        Format::Json => write_json(dir, &format!("{stem}.json"), &rows),
        Format::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let to_err = |e: csv::Error| CliError::Output {
                path: path.clone(),
                source: std::io::Error::other(e.to_string()),
            };
            let mut w = csv::Writer::from_path(&path).map_err(to_err)?;
            for row in rows {
                w.serialize(row).map_err(to_err)?;
            }
            w.flush().map_err(io_err(&path))?;
            Ok(path)
        }
    }
}
