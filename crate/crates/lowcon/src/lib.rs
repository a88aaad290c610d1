//! Experiment harness for low-condition-number subsampling: configuration,
//! CSV ingestion, replicated simulations, empirical MSE on real data, and
//! theory diagnostics.

pub mod config;
pub mod dataset;
pub mod diagnose;
pub mod error;
pub mod harness;
pub mod output;
pub mod response;

pub use config::{ExperimentConfig, Mode};
pub use dataset::{ingest_csv, Dataset};
pub use diagnose::{diagnose, DiagnoseRow};
pub use error::{HarnessError, Result};
pub use harness::{run_emse, run_simulation, EmseRow, ResultRow, RunOptions, RunOutcome};
