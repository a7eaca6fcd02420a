//! Run configuration and the pipeline's file outputs.
//!
//! Every file is written to a temporary sibling and renamed into place, so
//! an interrupted run never leaves a truncated output behind.

mod config;
mod families;
mod summary;

use std::io::{self, BufWriter, Write};
use std::path::Path;

pub use config::{load_config, parse_config, ConfigFile, RunConfig};
pub use families::{format_float, read_families_jsonl, write_families_jsonl, FamilyRecord, MemberRecord};
pub use summary::{write_summary_csv, SUMMARY_HEADER};

use crate::{Error, Result};

/// Writes `path` through `f` atomically: the content goes to a temporary file
/// in the same directory, which is flushed, synced and renamed over `path`.
pub fn write_atomic<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::Builder::new()
        .prefix(".varfam-")
        .tempfile_in(dir)
        .map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(tmp);
    f(&mut out).map_err(|e| Error::io(path, e))?;
    let tmp = out.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Pretty-printed JSON followed by a newline, written atomically.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
        w.write_all(b"\n")
    })
}
