use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_to_string, write_atomic};
use crate::error::{Error, Result};
use crate::estimation::RecordKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    /// One FRF CSV.
    FrfCsv,
    /// A force record followed by a response record.
    ImpulsePair,
    /// Force/response records interleaved: `f1, x1, f2, x2, ...`.
    MeasurementSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub label: String,
    pub kind: EntryKind,
    pub paths: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl ManifestEntry {
    /// Response quantity of time-record entries, from the `response_kind`
    /// metadata key; velocity when absent.
    pub fn response_kind(&self) -> Result<RecordKind> {
        match self.metadata.get("response_kind") {
            None => Ok(RecordKind::Velocity),
            Some(serde_json::Value::String(s)) => s.parse(),
            Some(other) => Err(Error::Argument(format!(
                "{}: response_kind must be a string, got {other}",
                self.label
            ))),
        }
    }
}

/// JSON list of dataset entries. Relative paths are resolved against the
/// directory holding the manifest when it is loaded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let mut manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for entry in &mut manifest.entries {
            for p in &mut entry.paths {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        manifest.validate().map_err(|e| Error::format(path, e.to_string()))?;
        for entry in &manifest.entries {
            if let Some(missing) = entry.paths.iter().find(|p| !p.is_file()) {
                return Err(Error::format(
                    path,
                    format!("{}: file {} does not exist", entry.label, missing.display()),
                ));
            }
        }
        Ok(manifest)
    }

    /// Writes the manifest as given; paths are not made relative.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }

    /// Unique non-empty labels and path counts that fit each kind.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if e.label.trim().is_empty() {
                return Err(Error::Argument("manifest entry with empty label".into()));
            }
            if !seen.insert(e.label.as_str()) {
                return Err(Error::Argument(format!("duplicate label '{}'", e.label)));
            }
            let n = e.paths.len();
            let ok = match e.kind {
                EntryKind::FrfCsv => n == 1,
                EntryKind::ImpulsePair => n == 2,
                EntryKind::MeasurementSet => n >= 2 && n % 2 == 0,
            };
            if !ok {
                return Err(Error::Argument(format!(
                    "{}: {n} paths do not fit kind {:?}",
                    e.label, e.kind
                )));
            }
            e.response_kind()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_kind_is_rejected() {
        let r: std::result::Result<DatasetManifest, _> = serde_json::from_str(
            r#"{"entries":[{"label":"a","kind":"uff58","paths":["a.uff"]}]}"#,
        );
        assert!(r.unwrap_err().to_string().contains("uff58"));
    }

    #[test]
    fn validation() {
        let entry = |label: &str, kind, n: usize| ManifestEntry {
            label: label.into(),
            kind,
            paths: (0..n).map(|i| PathBuf::from(format!("{i}.csv"))).collect(),
            metadata: BTreeMap::new(),
        };
        let ok = DatasetManifest {
            entries: vec![entry("a", EntryKind::FrfCsv, 1), entry("b", EntryKind::MeasurementSet, 12)],
        };
        assert!(ok.validate().is_ok());
        let dup = DatasetManifest {
            entries: vec![entry("a", EntryKind::FrfCsv, 1), entry("a", EntryKind::FrfCsv, 1)],
        };
        assert!(dup.validate().is_err());
        let odd = DatasetManifest {
            entries: vec![entry("a", EntryKind::MeasurementSet, 3)],
        };
        assert!(odd.validate().is_err());
        let mut bad_kind = entry("a", EntryKind::ImpulsePair, 2);
        bad_kind.metadata.insert("response_kind".into(), "displacement".into());
        assert!(DatasetManifest { entries: vec![bad_kind] }.validate().is_err());
    }
}
