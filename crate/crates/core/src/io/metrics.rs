//! Line-delimited JSON metrics, one record per line.
//!
//! Field order is fixed: `k, mu, loss_w, loss_compressed, constraint_norm,
//! lambda_norm, lstep_iters_used, wallclock_ms`.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::modelfile::read_file;
use crate::error::{Error, Result};
use crate::lc::MetricsRecord;

/// Appends one record (creating the file if needed).
pub fn append_metrics(path: &Path, record: &MetricsRecord) -> Result<()> {
    append_line(path, record)
}

pub(crate) fn append_line<T: Serialize>(path: &Path, record: &T) -> Result<()> {
    if path.as_os_str().is_empty() {
        return Err(Error::config("metrics path is empty"));
    }
    let line = serde_json::to_string(record).map_err(|e| Error::numeric(e.to_string(), None))?;
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    writeln!(f, "{line}").map_err(|e| Error::io(path, e))
}

/// Reads every record; an empty file is an error.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRecord>> {
    read_lines(path)
}

pub(crate) fn read_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    if out.is_empty() {
        return Err(Error::Parse { path: path.to_path_buf(), line: 1, message: "no records".into() });
    }
    Ok(out)
}
