//! Config-driven verification campaigns over the `qrlab` library.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::{Path, PathBuf};

pub use commands::{run, run_with_format, Run};
pub use config::{Command, RunConfig, Tolerances};
pub use error::CliError;
pub use report::{emit, Criterion, Format, Report};

/// Runs `command` and writes the report and artifacts to `out`.
pub fn execute(
    command: Command,
    cfg: &RunConfig,
    format: Format,
    out: &Path,
) -> Result<(Report, Vec<PathBuf>), CliError> {
    let Run { report, artifacts } = run_with_format(command, cfg, format)?;
    let written = emit(&report, format, out, &artifacts)?;
    Ok((report, written))
}

/// [`CliError::ToleranceFail`] if any criterion is unmet.
pub fn verdict(report: &Report) -> Result<(), CliError> {
    match report.failures().len() {
        0 => Ok(()),
        k => Err(CliError::ToleranceFail(k, report.criteria.len())),
    }
}
