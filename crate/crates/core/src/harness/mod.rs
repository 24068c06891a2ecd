//! Batch driver: configured runs with energy tracking and CSV output,
//! perturbation ensembles, step-size scans, resonance and spectrum reports.

mod config;
mod report;
mod run;

use thiserror::Error;

use crate::integrators::IntegrationError;
use crate::model::ModelError;

pub use config::{parse_real, ConfigMap, MethodSpec, PerturbTarget, Perturbation, RunConfig, ScanConfig, StepControl};
pub use report::{resonance_report, spectrum_report, write_peaks_csv, ResonanceReport, SpectrumRequest};
pub use run::{
    ensemble, prepare, scan, simulate, simulate_to, write_scan_csv, EnsembleMember, MaxDeviations, Prepared,
    RunSummary, ScanRow, CSV_HEADER, SCAN_HEADER,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure at {0}")]
    Numerical(#[from] IntegrationError),
    /// The configured step makes a filter or the momentum recovery singular.
    #[error("resonant step size: {0}")]
    ResonantStep(String),
    #[error("energy became non-finite at step {step}")]
    NonFinite { step: usize },
    #[error("numerical failure: {0}")]
    Analysis(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 2 for configuration errors, 3 for numerical
    /// failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(_)
            | HarnessError::ResonantStep(_)
            | HarnessError::NonFinite { .. }
            | HarnessError::Analysis(_) => 3,
            HarnessError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }
}

impl From<ModelError> for HarnessError {
    fn from(e: ModelError) -> Self {
        HarnessError::Config(e.to_string())
    }
}
