//! Experiment orchestration: configs, dispatch and reports.

pub mod config;
pub mod report;
pub mod run;

pub use config::{CertifierChoice, ExperimentConfig, ExperimentKind, Mode, SchemeChoice};
pub use report::{ExperimentReport, OutputFormat, Table};
pub use run::run;
