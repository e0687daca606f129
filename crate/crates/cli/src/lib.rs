//! Scenario-driven front end: read a JSON scenario, run one computation and
//! write its curve tables.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

pub use commands::{run, Command, Outcome};
pub use config::{OutputFormat, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use output::{Cell, Table};

#[derive(Debug)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub outcome: Outcome,
    pub exit_code: u8,
}

/// Load, run and write. `out` overrides the configured output directory.
pub fn execute(
    command: Command,
    config_path: &Path,
    out: Option<&Path>,
    strict: bool,
) -> CliResult<Report> {
    let config = ScenarioConfig::from_path(config_path)?;
    let outcome = run(command, &config, strict)?;
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.output.path.clone());
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let files = outcome
        .tables
        .iter()
        .map(|t| t.write(&dir, config.output.format))
        .collect::<CliResult<Vec<_>>>()?;
    let exit_code = if outcome.strict_violation.is_some() {
        3
    } else {
        0
    };
    Ok(Report {
        files,
        outcome,
        exit_code,
    })
}
