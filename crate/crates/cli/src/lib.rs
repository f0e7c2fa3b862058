//! Scenario runner for the `nlqm` experiments.
//!
//! A scenario is a JSON file naming one experiment, its parameters and the
//! integrator settings. Running it writes `report.json` and one CSV per
//! series table into a scenario-scoped directory.

pub mod experiments;
pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};

pub use experiments::Experiment;
pub use output::{compare_series, read_series, write_series, Norm, RunReport, SeriesTable, Status};
pub use scenario::{load_scenario, parse_scenario, Scalar, Scenario};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "NLQM_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid field `{field}`: {detail}")]
    Schema { field: String, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed CSV: {detail}")]
    Csv { path: String, detail: String },
    #[error("time grids differ: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Core(#[from] nlqm::Error),
}

impl CliError {
    pub(crate) fn schema(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::Schema {
            field: field.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// `--out`, else `$NLQM_OUT`, else `nlqm-out` in the working directory.
pub fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("nlqm-out"))
}

/// Runs a loaded scenario and writes its files under `root/<name>/`.
///
/// Numerical failures become a report with status `error`; only I/O problems
/// surface as `Err`.
pub fn run_scenario(scenario: &Scenario, root: &Path) -> Result<RunReport> {
    let dir = root.join(&scenario.name);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut report = RunReport::new(scenario);
    match experiments::run(scenario) {
        Ok(outcome) => {
            report.status = if outcome.pass { Status::Pass } else { Status::Fail };
            report.metrics = outcome.metrics;
            for table in outcome.tables {
                let Some(table) = table.select(scenario.outputs.as_deref()) else {
                    continue;
                };
                let path = dir.join(format!("{}.csv", table.name));
                write_series(&table, &path)?;
                report.series.push(format!("{}.csv", table.name));
            }
        }
        Err(e) => {
            report.status = Status::Error;
            report.error = Some(e.to_string());
        }
    }
    report.write(&dir.join("report.json"))?;
    Ok(report)
}
