//! Dataset manifest: a null shape plus its transformed versions.
//!
//! JSON on disk:
//!
//! ```json
//! {
//!   "name": "human",
//!   "null": "null.off",
//!   "entries": [
//!     {"class": "noise", "strength": 1, "mesh": "noise.1.off",
//!      "corr": "noise.1.corr", "seed": 17},
//!     {"class": "isometry", "strength": 3, "mesh": "iso.3.off",
//!      "corr": "iso.3.corr"}
//!   ]
//! }
//! ```
//!
//! `class` is free-form: the synthesizable class names are recognized, and
//! anything else (isometry, rasterization, view, topology, ...) denotes an
//! externally produced transform whose files are simply referenced. Paths
//! are relative to the manifest's directory; loading resolves them and
//! checks they exist.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The transformation classes a complete benchmark covers, one table row
/// each: eight synthesized here plus three that only exist as external
/// files.
pub const CANONICAL_CLASSES: [&str; 11] = [
    "affine",
    "holes",
    "isometry",
    "micro-holes",
    "noise",
    "partial",
    "rasterization",
    "sampling",
    "scaling",
    "shot-noise",
    "view",
];

/// Strengths each class comes in.
pub const STRENGTHS: std::ops::RangeInclusive<u8> = 1..=5;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    /// Path of the null (reference) shape.
    pub null: PathBuf,
    /// Dataset name for report headers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestEntry {
    pub class: String,
    pub strength: u8,
    /// Transformed mesh file.
    pub mesh: PathBuf,
    /// Groundtruth correspondence file.
    pub corr: PathBuf,
    /// Seed used to synthesize the entry; absent for external transforms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Coverage of the canonical class × strength grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completeness {
    pub present: usize,
    pub expected: usize,
    /// Missing (class, strength) cells, ascending.
    pub missing: Vec<(String, u8)>,
}

impl Completeness {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }
}

impl Manifest {
    /// Reads a manifest, resolves every path relative to the manifest's
    /// directory, and verifies the referenced files exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut m: Manifest = serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
            what: "manifest",
            line: e.line(),
            msg: e.to_string(),
        })?;
        for e in &m.entries {
            if !(1..=5).contains(&e.strength) {
                return Err(Error::InvalidInput(format!(
                    "manifest entry `{}` has strength {}, expected 1..=5",
                    e.class, e.strength
                )));
            }
            if e.class.trim().is_empty() {
                return Err(Error::InvalidInput(
                    "manifest entry with an empty class name".into(),
                ));
            }
        }
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let resolve = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        m.null = resolve(&m.null);
        for e in &mut m.entries {
            e.mesh = resolve(&e.mesh);
            e.corr = resolve(&e.corr);
        }
        for p in std::iter::once(&m.null)
            .chain(m.entries.iter().flat_map(|e| [&e.mesh, &e.corr]))
        {
            fs::metadata(p).map_err(|err| Error::io(p, err))?;
        }
        Ok(m)
    }

    /// Writes the manifest as pretty JSON (paths stored as-is, so keep them
    /// relative when the dataset should be relocatable).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    /// Reports coverage of the canonical 11 × 5 grid. Classes outside the
    /// canonical list (e.g. `topology`) count as present cells but add no
    /// expectations.
    pub fn completeness(&self) -> Completeness {
        let have: BTreeSet<(&str, u8)> = self
            .entries
            .iter()
            .map(|e| (e.class.as_str(), e.strength))
            .collect();
        let mut missing = Vec::new();
        for class in CANONICAL_CLASSES {
            for s in STRENGTHS {
                if !have.contains(&(class, s)) {
                    missing.push((class.to_string(), s));
                }
            }
        }
        Completeness {
            present: have.len(),
            expected: CANONICAL_CLASSES.len() * STRENGTHS.count(),
            missing,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch(dir: &Path, name: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, b"x").unwrap();
        PathBuf::from(name)
    }

    #[test]
    fn round_trips_and_resolves_paths() {
        let dir = tempfile::tempdir().unwrap();
        let m = Manifest {
            null: touch(dir.path(), "null.off"),
            name: Some("demo".into()),
            entries: vec![
                ManifestEntry {
                    class: "noise".into(),
                    strength: 2,
                    mesh: touch(dir.path(), "noise.2.off"),
                    corr: touch(dir.path(), "noise.2.corr"),
                    seed: Some(7),
                },
                ManifestEntry {
                    class: "isometry".into(),
                    strength: 1,
                    mesh: touch(dir.path(), "iso.1.off"),
                    corr: touch(dir.path(), "iso.1.corr"),
                    seed: None,
                },
            ],
        };
        let path = dir.path().join("dataset.json");
        m.save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(!text.contains("\"seed\": null"), "absent seed is omitted");
        let loaded = Manifest::load(&path).unwrap();
        assert_eq!(loaded.null, dir.path().join("null.off"));
        assert_eq!(loaded.entries[0].mesh, dir.path().join("noise.2.off"));
        assert_eq!(loaded.entries[0].seed, Some(7));
        assert_eq!(loaded.entries[1].seed, None);
        assert_eq!(loaded.name.as_deref(), Some("demo"));
    }

    #[test]
    fn missing_files_and_bad_fields_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.json");
        fs::write(
            &path,
            r#"{"null": "absent.off", "entries": []}"#,
        )
        .unwrap();
        assert!(Manifest::load(&path).is_err());

        touch(dir.path(), "null.off");
        touch(dir.path(), "m.off");
        touch(dir.path(), "m.corr");
        fs::write(
            &path,
            r#"{"null": "null.off", "entries": [
                {"class": "noise", "strength": 9, "mesh": "m.off", "corr": "m.corr"}
            ]}"#,
        )
        .unwrap();
        assert!(Manifest::load(&path).is_err(), "strength out of range");

        fs::write(&path, "{not json").unwrap();
        assert!(matches!(
            Manifest::load(&path),
            Err(Error::Parse { what: "manifest", .. })
        ));
    }

    #[test]
    fn completeness_counts_the_grid() {
        let mut m = Manifest {
            null: "null.off".into(),
            name: None,
            entries: Vec::new(),
        };
        let c = m.completeness();
        assert_eq!(c.expected, 55);
        assert_eq!(c.present, 0);
        assert_eq!(c.missing.len(), 55);
        assert!(!c.is_complete());

        for class in CANONICAL_CLASSES {
            for s in STRENGTHS {
                m.entries.push(ManifestEntry {
                    class: class.into(),
                    strength: s,
                    mesh: "m.off".into(),
                    corr: "m.corr".into(),
                    seed: None,
                });
            }
        }
        // An extra-canonical class counts as present but adds no blanks.
        m.entries.push(ManifestEntry {
            class: "topology".into(),
            strength: 1,
            mesh: "t.off".into(),
            corr: "t.corr".into(),
            seed: None,
        });
        let c = m.completeness();
        assert_eq!(c.present, 56);
        assert!(c.is_complete());
    }
}
