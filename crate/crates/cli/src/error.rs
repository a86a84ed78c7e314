use std::path::PathBuf;

use thiserror::Error;

use crate::ingest::IngestError;

/// Failure of a command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Output { .. } => 1,
        }
    }
}

impl From<adopt_core::Error> for CliError {
    fn from(e: adopt_core::Error) -> Self {
        use adopt_core::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidDistribution(_)
            | E::InvalidParameter { .. }
            | E::DegenerateWindow { .. }
            | E::RealWorldMeasure
            | E::JumpProbabilityTooLarge(_)
            | E::Unsupported(_)
            | E::WindowLength { .. } => CliError::Config(msg),
            E::InsufficientData { .. }
            | E::SampleSizeOutOfRange { .. }
            | E::ZeroVariance(_)
            | E::InvalidSeries(_)
            | E::DetectorUnavailable(_) => CliError::Data(msg),
            E::SeriesNotConverged { .. }
            | E::NotConverged { .. }
            | E::DegenerateVariance(_)
            | E::UndefinedRevenueRatio => CliError::Numerical(msg),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
