use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pinching_noma::experiments::{write_csv, RunConfig, SweepRecord};
use tempfile::NamedTempFile;

use crate::CliError;

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes through a temporary file in the target directory, then renames it
/// into place, so a failed run never leaves a partial file behind.
pub fn write_atomic(
    path: &Path,
    fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        fill(&mut out).map_err(|e| io_error(path, e))?;
        out.flush().map_err(|e| io_error(path, e))?;
    }
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

/// `results.csv` -> `results.config.json`
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("config.json")
}

pub fn write_results(
    path: &Path,
    records: &[SweepRecord],
    config: &RunConfig,
) -> Result<PathBuf, CliError> {
    let sidecar = sidecar_path(path);
    let json = serde_json::to_string_pretty(&config.to_json_value()).expect("config serializes");
    write_atomic(&sidecar, |out| writeln!(out, "{json}"))?;
    write_atomic(path, |out| write_csv(out, records))?;
    Ok(sidecar)
}
