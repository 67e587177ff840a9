//! Artifact writers. Every CSV starts with `#` comment lines holding the run
//! configuration; every JSON artifact carries it under `"config"`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::failure::{io_failure, Failure, StageResult};

fn create(path: &Path, stage: &'static str) -> Result<BufWriter<File>, Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_failure(stage, format!("{}: {e}", parent.display())))?;
    }
    let f = File::create(path).map_err(|e| io_failure(stage, format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

/// `extra` lines go after the config line, each prefixed with `# `.
pub fn write_csv<R: Serialize>(
    path: &Path,
    stage: &'static str,
    config: &RunConfig,
    extra: &[String],
    rows: impl IntoIterator<Item = R>,
) -> Result<(), Failure> {
    let mut w = create(path, stage)?;
    writeln!(w, "# {}", config.header()).stage(stage)?;
    for line in extra {
        writeln!(w, "# {line}").stage(stage)?;
    }
    let mut csv = csv::Writer::from_writer(w);
    let mut empty = true;
    for r in rows {
        csv.serialize(r).stage(stage)?;
        empty = false;
    }
    if empty {
        log::warn!("{}: no rows", path.display());
    }
    csv.flush().stage(stage)?;
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, stage: &'static str, config: &RunConfig, body: &T) -> Result<(), Failure> {
    let mut w = create(path, stage)?;
    serde_json::to_writer_pretty(&mut w, &Envelope { config, body })
        .map_err(|e| io_failure(stage, format!("{}: {e}", path.display())))?;
    writeln!(w).stage(stage)?;
    w.flush().stage(stage)?;
    Ok(())
}

/// `dir/rank.csv` + `"correlation"` -> `dir/rank_correlation.csv`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}{ext}"))
}
