//! Experiment configuration, eigenform ingestion, experiment runners and report output.

pub mod config;
pub mod experiments;
pub mod ingest;
pub mod report;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{
    admissible, ExperimentConfig, ExperimentKind, HeckeChoice, HeckeKind, OmegaSelector,
};
pub use experiments::{default_config, run, run_with_jobs, RunOutput};
pub use ingest::{CoefficientTable, IngestError};
pub use report::{ReportRow, Status};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{}: {source}", path.display())]
    Ingest {
        path: PathBuf,
        #[source]
        source: IngestError,
    },
    #[error(transparent)]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}
