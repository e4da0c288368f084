//! Experiment runner for the tucker-cross library: configurable runs of the
//! numerical studies, written as CSV, plus the dense reference solvers and
//! special functions they are checked against.

pub mod config;
pub mod experiments;
pub mod functions;
pub mod green;
pub mod output;
pub mod reference;

use anyhow::Result;

use config::ExperimentConfig;
use output::Table;

/// Runs the configured experiment and writes its tables. Returns the
/// resolved config (defaults filled in) and the tables.
pub fn run_and_write(mut cfg: ExperimentConfig) -> Result<(ExperimentConfig, Vec<Table>)> {
    let tables = experiments::run(&mut cfg)?;
    output::write_tables(&tables, cfg.out.as_deref(), &cfg.provenance())?;
    Ok((cfg, tables))
}
