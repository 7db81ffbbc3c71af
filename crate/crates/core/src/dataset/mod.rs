//! Dataset ingestion, wildcard listing, the seeded PRNG and stratified
//! splitting.

pub mod glob;
mod ingest;
mod prepare;
mod rng;
mod split;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::emotion::EmotionLabel;
pub use glob::{glob_match, list_matching, GlobPattern};
pub use ingest::ingest_ck;
pub use prepare::{prepare_faces, PrepareOptions, PrepareReport, SkippedRecord};
pub use rng::{Rng, RngError};
pub use split::{split, split_indices};

pub const MANIFEST_VERSION: u32 = 1;
pub const DEFAULT_FACE_SIZE: u32 = 48;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {message}")]
    Ingest { path: PathBuf, message: String },
    #[error("dataset is empty")]
    Empty,
    #[error("class {label} has {count} record(s); at least 2 are needed to split")]
    Split { label: EmotionLabel, count: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("no faces survived preparation ({} record(s) skipped)", report.skipped.len())]
    NoFaces { report: PrepareReport },
    #[error(transparent)]
    Cascade(#[from] crate::cascade::CascadeError),
}

impl DatasetError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DatasetError::Io { path: path.into(), source }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleRecord {
    pub image_path: PathBuf,
    pub label: EmotionLabel,
    pub subject: String,
    pub session: String,
}

impl SampleRecord {
    fn sort_key(&self) -> (&str, &str, &Path) {
        (&self.subject, &self.session, &self.image_path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub face_w: u32,
    pub face_h: u32,
    pub records: Vec<SampleRecord>,
}

impl DatasetManifest {
    /// Builds a manifest with records in canonical (subject, session, path)
    /// order.
    pub fn new(face_w: u32, face_h: u32, mut records: Vec<SampleRecord>) -> Self {
        records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        DatasetManifest { version: MANIFEST_VERSION, face_w, face_h, records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct labels in code order.
    pub fn classes(&self) -> Vec<EmotionLabel> {
        let mut c: Vec<_> = self.records.iter().map(|r| r.label).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn labels(&self) -> Vec<EmotionLabel> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// Keeps records whose label is in `subset`, preserving order.
    pub fn filter_labels(&self, subset: &[EmotionLabel]) -> DatasetManifest {
        DatasetManifest {
            records: self.records.iter().filter(|r| subset.contains(&r.label)).cloned().collect(),
            ..self.clone()
        }
    }

    pub fn select(&self, indices: &[usize]) -> DatasetManifest {
        DatasetManifest {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self, DatasetError> {
        let m: DatasetManifest = serde_json::from_str(text)
            .map_err(|e| DatasetError::Manifest { path: path.to_path_buf(), message: e.to_string() })?;
        if m.version != MANIFEST_VERSION {
            return Err(DatasetError::Manifest {
                path: path.to_path_buf(),
                message: format!("unsupported version {} (expected {MANIFEST_VERSION})", m.version),
            });
        }
        Ok(m)
    }

    /// Reads a manifest file. Relative image paths are resolved against the
    /// directory holding the manifest.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        let mut m = Self::from_json(&text, path)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for r in &mut m.records {
            if r.image_path.is_relative() {
                r.image_path = dir.join(&r.image_path);
            }
        }
        Ok(m)
    }

    /// Writes the manifest, storing image paths that live under the
    /// manifest's directory relative to it.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let path = path.as_ref();
        let dir = std::path::absolute(path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new(".")))
            .map_err(|e| DatasetError::io(path, e))?;
        let mut out = self.clone();
        for r in &mut out.records {
            let abs = std::path::absolute(&r.image_path).map_err(|e| DatasetError::io(&r.image_path, e))?;
            r.image_path = match abs.strip_prefix(&dir) {
                Ok(rel) => rel.to_path_buf(),
                Err(_) => abs,
            };
        }
        fs::write(path, out.to_json()).map_err(|e| DatasetError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(subject: &str, session: &str, path: &str, label: EmotionLabel) -> SampleRecord {
        SampleRecord { image_path: path.into(), label, subject: subject.into(), session: session.into() }
    }

    #[test]
    fn canonical_order_and_json() {
        let m = DatasetManifest::new(
            48,
            48,
            vec![
                rec("S2", "001", "b.pgm", EmotionLabel::Happy),
                rec("S1", "002", "a.pgm", EmotionLabel::Neutral),
                rec("S1", "001", "z.pgm", EmotionLabel::Fear),
            ],
        );
        let order: Vec<_> = m.records.iter().map(|r| r.image_path.to_str().unwrap()).collect();
        assert_eq!(order, ["z.pgm", "a.pgm", "b.pgm"]);
        let back = DatasetManifest::from_json(&m.to_json(), Path::new("m.json")).unwrap();
        assert_eq!(back, m);
        assert!(m.to_json().contains("\"label\": \"fear\""));
        assert_eq!(m.classes(), [EmotionLabel::Neutral, EmotionLabel::Happy, EmotionLabel::Fear]);

        let bad = m.to_json().replace("\"version\": 1", "\"version\": 7");
        assert!(DatasetManifest::from_json(&bad, Path::new("m.json")).is_err());
    }

    #[test]
    fn paths_relative_to_manifest_dir() {
        let dir = tempfile::tempdir().unwrap();
        let inside = dir.path().join("faces/happy/a.pgm");
        let outside = PathBuf::from("/elsewhere/b.pgm");
        let m = DatasetManifest::new(
            48,
            48,
            vec![rec("S1", "001", inside.to_str().unwrap(), EmotionLabel::Happy), rec("S2", "001", "/elsewhere/b.pgm", EmotionLabel::Sad)],
        );
        let path = dir.path().join("faces/manifest.json");
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        m.save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"image_path\": \"happy/a.pgm\""), "{text}");
        assert!(text.contains("/elsewhere/b.pgm"));
        let back = DatasetManifest::load(&path).unwrap();
        assert_eq!(back.records[0].image_path, dir.path().join("faces").join("happy/a.pgm"));
        assert_eq!(back.records[1].image_path, outside);
    }

    proptest::proptest! {
        #[test]
        fn json_round_trip(
            recs in proptest::collection::vec(("[A-Z][0-9]{1,3}", "[0-9]{3}", "[a-z_/ .]{1,12}", 0u8..8), 0..12),
            w in 1u32..200,
            h in 1u32..200,
        ) {
            let records = recs
                .iter()
                .map(|(s, e, p, c)| rec(s, e, p, EmotionLabel::from_code(*c).unwrap()))
                .collect();
            let m = DatasetManifest::new(w, h, records);
            let back = DatasetManifest::from_json(&m.to_json(), Path::new("m.json")).unwrap();
            proptest::prop_assert_eq!(back, m);
        }
    }
}
