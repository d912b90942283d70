//! Atomic artifact writes: each file goes to a temporary sibling first and
//! is renamed into place, so readers never see a partial file.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::run::Outcome;
use crate::scenario::{Format, Scenario};
use crate::CliError;

pub const SUMMARY_FILE: &str = "summary.json";
pub const RESOLVED_FILE: &str = "scenario.resolved.toml";

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let target = dir.join(name);
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(contents).map_err(|e| io_err(&target, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(&target, e))?;
    tmp.persist(&target).map_err(|e| io_err(&target, e.error))?;
    Ok(target)
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("summary serializes to JSON");
    out.push(b'\n');
    out
}

/// Writes the run's artifacts, its summary (when JSON output is on) and the
/// resolved scenario into `dir`.
pub fn write_outcome(dir: &Path, scenario: &Scenario, outcome: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for a in &outcome.artifacts {
        written.push(write_atomic(dir, a.name, &a.contents)?);
    }
    if scenario.writes(Format::Json) {
        written.push(write_atomic(dir, SUMMARY_FILE, &to_json(&outcome.summary))?);
    }
    written.push(write_atomic(dir, RESOLVED_FILE, scenario.resolved().to_toml().as_bytes())?);
    Ok(written)
}
