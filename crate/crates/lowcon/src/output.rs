use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Environment variable that redirects every output file into a directory.
pub const OUTPUT_DIR_ENV: &str = "LOWCON_OUTPUT_DIR";

/// Applies the output-directory override to a configured path.
pub fn resolve_output(path: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    resolve_output_in(std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from), path, default_name)
}

fn resolve_output_in(dir: Option<PathBuf>, path: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    match (dir, path) {
        (Some(dir), Some(p)) => Some(dir.join(p.file_name().unwrap_or(p.as_os_str()))),
        (Some(dir), None) => Some(dir.join(default_name)),
        (None, p) => p.map(Path::to_path_buf),
    }
}

/// Writes rows as CSV with a header derived from the row fields.
pub fn write_rows<R: Serialize, W: Write>(rows: &[R], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit<R: Serialize>(rows: &[R], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            write_rows(rows, std::fs::File::create(p)?)
        }
        None => write_rows(rows, std::io::stdout().lock()),
    }
}
