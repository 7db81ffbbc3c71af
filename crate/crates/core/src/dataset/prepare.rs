use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DatasetError, DatasetManifest, SampleRecord};
use crate::cascade::{detect_face_sequence, CascadeModel, DetectParams};
use crate::imgproc::{self, pnm, GrayMethod};

#[derive(Debug, Clone)]
pub struct PrepareOptions {
    pub face_w: u32,
    pub face_h: u32,
    pub gray: GrayMethod,
    pub detect: DetectParams,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            face_w: super::DEFAULT_FACE_SIZE,
            face_h: super::DEFAULT_FACE_SIZE,
            gray: GrayMethod::Luminosity,
            detect: DetectParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRecord {
    pub image_path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepareReport {
    pub prepared: usize,
    /// In manifest order.
    pub skipped: Vec<SkippedRecord>,
}

fn output_path(out_root: &Path, r: &SampleRecord) -> PathBuf {
    out_root.join(r.label.name()).join(format!("{}_{}.pgm", r.subject, r.session))
}

fn prepare_one(
    record: &SampleRecord,
    out: &Path,
    cascades: &[CascadeModel],
    opts: &PrepareOptions,
) -> Result<(), String> {
    let gray = pnm::read_gray(&record.image_path, opts.gray).map_err(|e| e.to_string())?;
    let face = detect_face_sequence(cascades, &gray, &opts.detect)
        .map_err(|e| e.to_string())?
        .ok_or_else(|| "no face detected".to_string())?;
    let cropped = imgproc::crop(&gray, face).map_err(|e| e.to_string())?;
    let normalized = imgproc::resize_bilinear(&cropped, opts.face_w, opts.face_h).map_err(|e| e.to_string())?;
    if let Some(dir) = out.parent() {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    pnm::write_pgm(out, &normalized).map_err(|e| format!("{}: {e}", out.display()))
}

/// Grayscale, detect, crop, resize and save every record's face under
/// `out_root/<emotion>/<subject>_<session>.pgm`.
///
/// Records without a detectable face (or that fail to load) are dropped and
/// listed in the report. Returns a manifest over the written files.
pub fn prepare_faces(
    manifest: &DatasetManifest,
    cascades: &[CascadeModel],
    out_root: impl AsRef<Path>,
    opts: &PrepareOptions,
) -> Result<(DatasetManifest, PrepareReport), DatasetError> {
    if cascades.is_empty() {
        return Err(DatasetError::InvalidArgument("at least one cascade is required".into()));
    }
    if opts.face_w == 0 || opts.face_h == 0 {
        return Err(DatasetError::InvalidArgument("face size must be at least 1x1".into()));
    }
    let out_root = out_root.as_ref();

    // Output paths are assigned in manifest order; a later record that
    // would overwrite an earlier one is dropped.
    let mut taken = HashSet::new();
    let jobs: Vec<(&SampleRecord, Option<PathBuf>)> = manifest
        .records
        .iter()
        .map(|r| {
            let p = output_path(out_root, r);
            let fresh = taken.insert(p.clone());
            (r, fresh.then_some(p))
        })
        .collect();

    let run = |(r, out): &(&SampleRecord, Option<PathBuf>)| -> Result<PathBuf, String> {
        let out = out.as_ref().ok_or_else(|| "duplicate subject/session/emotion output path".to_string())?;
        prepare_one(r, out, cascades, opts)?;
        Ok(out.clone())
    };

    #[cfg(feature = "parallel")]
    let results: Vec<Result<PathBuf, String>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<PathBuf, String>> = jobs.iter().map(run).collect();

    let mut report = PrepareReport::default();
    let mut records = Vec::new();
    for ((record, _), result) in jobs.iter().zip(results) {
        match result {
            Ok(path) => records.push(SampleRecord { image_path: path, ..(*record).clone() }),
            Err(reason) => {
                log::info!("skipping {}: {reason}", record.image_path.display());
                report.skipped.push(SkippedRecord { image_path: record.image_path.clone(), reason });
            }
        }
    }
    report.prepared = records.len();
    if records.is_empty() {
        return Err(DatasetError::NoFaces { report });
    }
    Ok((DatasetManifest::new(opts.face_w, opts.face_h, records), report))
}
