use std::fs;
use std::path::{Path, PathBuf};

use super::glob::{list_matching, GlobPattern};
use super::{DatasetError, DatasetManifest, EmotionLabel, SampleRecord, DEFAULT_FACE_SIZE};

fn subdirs(dir: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    let all = list_matching(dir, &GlobPattern::new("*").unwrap()).map_err(|e| DatasetError::io(dir, e))?;
    Ok(all.into_iter().filter(|p| p.is_dir()).collect())
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Parses a label file holding a single CK code, e.g. `7` or
/// `   3.0000000e+00`.
fn parse_label_file(path: &Path) -> Result<EmotionLabel, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    let bad = |message: String| DatasetError::Ingest { path: path.to_path_buf(), message };
    let token = text.trim();
    let value: f64 = token.parse().map_err(|_| bad(format!("expected a numeric emotion code, found {token:?}")))?;
    if value.fract() != 0.0 || !(0.0..=255.0).contains(&value) {
        return Err(bad(format!("emotion code {value} is not an integer code")));
    }
    EmotionLabel::from_ck_code(value as u8).ok_or_else(|| bad(format!("emotion code {value} outside 1..=7")))
}

/// Walks a CK/CK+ style `subject/session/frames` tree.
///
/// Each session with a label file contributes its last frame with the
/// labeled emotion and its first frame as neutral. Sessions without a label
/// file are skipped.
pub fn ingest_ck(images_root: impl AsRef<Path>, labels_root: impl AsRef<Path>) -> Result<DatasetManifest, DatasetError> {
    let images_root = images_root.as_ref();
    let labels_root = labels_root.as_ref();
    for root in [images_root, labels_root] {
        if !root.is_dir() {
            return Err(DatasetError::io(
                root,
                std::io::Error::new(std::io::ErrorKind::NotFound, "directory not found"),
            ));
        }
    }
    let frame_pattern = GlobPattern::new("*.p?m").unwrap();
    let label_pattern = GlobPattern::new("*.txt").unwrap();

    let mut records = Vec::new();
    for subject_dir in subdirs(images_root)? {
        let subject = file_name(&subject_dir);
        for session_dir in subdirs(&subject_dir)? {
            let session = file_name(&session_dir);
            let label_dir = labels_root.join(&subject).join(&session);
            let label_files = if label_dir.is_dir() {
                list_matching(&label_dir, &label_pattern).map_err(|e| DatasetError::io(&label_dir, e))?
            } else {
                Vec::new()
            };
            let Some(label_file) = label_files.first() else {
                log::debug!("{}: no label file, skipped", session_dir.display());
                continue;
            };
            if label_files.len() > 1 {
                log::warn!("{}: several label files, using {}", label_dir.display(), label_file.display());
            }
            let label = parse_label_file(label_file)?;

            let frames: Vec<PathBuf> = list_matching(&session_dir, &frame_pattern)
                .map_err(|e| DatasetError::io(&session_dir, e))?
                .into_iter()
                .filter(|p| p.is_file())
                .collect();
            let (Some(first), Some(last)) = (frames.first(), frames.last()) else {
                log::warn!("{}: labeled session has no frames", session_dir.display());
                continue;
            };
            let record = |path: &Path, label| SampleRecord {
                image_path: path.to_path_buf(),
                label,
                subject: subject.clone(),
                session: session.clone(),
            };
            records.push(record(last, label));
            if frames.len() > 1 {
                records.push(record(first, EmotionLabel::Neutral));
            }
        }
    }
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(DatasetManifest::new(DEFAULT_FACE_SIZE, DEFAULT_FACE_SIZE, records))
}
