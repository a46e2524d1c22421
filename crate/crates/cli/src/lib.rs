//! Experiment runner for the `ipzo` solvers.
//!
//! A spec names a problem and a set of solvers; [`run`] writes one CSV trace
//! per (solver, repeat) and a `summary.csv`. See [`spec`] for the format.

pub mod runner;
pub mod spec;

use std::path::PathBuf;

pub use runner::{run, write_trace, RunOutcome, RunSummary, SUMMARY_HEADER, TRACE_HEADER};
pub use spec::{ExperimentSpec, RawSpec, SpecError, SpecErrors};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid spec:\n{0}")]
    Spec(#[from] SpecErrors),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Core(#[from] ipzo_core::Error),
    #[error("{0}")]
    Runtime(String),
}
