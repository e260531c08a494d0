//! File formats.
//!
//! Every writer renders into memory first and then replaces the target
//! through a temporary file in the same directory, so a crash never
//! leaves a half-written artifact. Floats are written with 17
//! significant digits (`{:.16e}`) and lines end in `\n`.

mod manifest;
mod records;
mod tables;
mod tree;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use manifest::{DatasetManifest, EntryKind, ManifestEntry};
pub use records::{
    load_time_record, load_time_records, save_time_record_csv, save_time_record_wav,
};
pub use tables::{
    load_distance_csv, load_features_csv, load_frf_csv, parse_frf_csv, render_distance_csv,
    render_features_csv, render_frf_csv, save_distance_csv, save_features_csv, save_frf_csv,
};
pub use tree::{
    load_dendrogram_json, render_dendrogram_json, render_newick, save_dendrogram_json,
    save_dendrogram_newick,
};

/// Replaces `path` with `bytes` via a sibling temporary file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".frfm-")
        .tempfile_in(dir)
        .map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Fixed 17-significant-digit rendering.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
