//! Seeded synthetic "blob" faces: a 3x3 grid where class i lights cell i.

use std::fs;
use std::path::Path;

use crate::dataset::{DatasetError, DatasetManifest, Rng, SampleRecord};
use crate::emotion::EmotionLabel;
use crate::eval::FaceSet;
use crate::imgproc::{pnm, GrayImage};

pub const BACKGROUND: f64 = 70.0;
pub const LIT: f64 = 180.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub face_w: u32,
    pub face_h: u32,
    /// At most 8 (one per emotion label, in code order).
    pub classes: usize,
    pub per_class: usize,
    /// Gaussian noise standard deviation in grey levels.
    pub noise: f64,
    pub seed: u64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        BlobSpec { face_w: 16, face_h: 16, classes: 3, per_class: 30, noise: 10.0, seed: 42 }
    }
}

impl BlobSpec {
    pub fn labels(&self) -> Vec<EmotionLabel> {
        EmotionLabel::ALL[..self.classes.min(EmotionLabel::ALL.len())].to_vec()
    }
}

/// Noise-free mean image of class `class_index`.
pub fn blob_mean(spec: &BlobSpec, class_index: usize) -> GrayImage {
    blob_face_with(spec, class_index, |_| 0.0)
}

/// One noisy sample of class `class_index`, drawing noise from `rng`.
pub fn blob_face(spec: &BlobSpec, class_index: usize, rng: &mut Rng) -> GrayImage {
    blob_face_with(spec, class_index, |s| s * rng.gaussian())
}

fn blob_face_with(spec: &BlobSpec, class_index: usize, mut noise: impl FnMut(f64) -> f64) -> GrayImage {
    assert!(class_index < 9, "blob classes light one of 9 grid cells");
    let (cx, cy) = (class_index as u32 % 3, class_index as u32 / 3);
    GrayImage::from_fn(spec.face_w, spec.face_h, |x, y| {
        let lit = x * 3 / spec.face_w == cx && y * 3 / spec.face_h == cy;
        let base = if lit { LIT } else { BACKGROUND };
        (base + noise(spec.noise)).round().clamp(0.0, 255.0) as u8
    })
}

/// `per_class` samples of every class, class-major, from one RNG stream.
pub fn blob_faces(spec: &BlobSpec) -> FaceSet {
    let mut rng = Rng::new(spec.seed);
    let labels = spec.labels();
    let mut faces = Vec::with_capacity(labels.len() * spec.per_class);
    let mut out_labels = Vec::with_capacity(faces.capacity());
    for (ci, &l) in labels.iter().enumerate() {
        for _ in 0..spec.per_class {
            faces.push(blob_face(spec, ci, &mut rng));
            out_labels.push(l);
        }
    }
    FaceSet::new(faces, out_labels).expect("blob spec yields a non-empty uniform set")
}

/// Writes the blob set as `root/<emotion>/blob_NNN.pgm` and returns its
/// prepared manifest.
pub fn write_blob_dataset(spec: &BlobSpec, root: impl AsRef<Path>) -> Result<DatasetManifest, DatasetError> {
    let root = root.as_ref();
    let set = blob_faces(spec);
    let mut records = Vec::with_capacity(set.len());
    for (i, (face, &label)) in set.faces.iter().zip(&set.labels).enumerate() {
        let dir = root.join(label.name());
        fs::create_dir_all(&dir).map_err(|e| DatasetError::io(&dir, e))?;
        let path = dir.join(format!("blob_{i:03}.pgm"));
        pnm::write_pgm(&path, face)
            .map_err(|e| DatasetError::Ingest { path: path.clone(), message: e.to_string() })?;
        records.push(SampleRecord {
            image_path: path,
            label,
            subject: "blob".into(),
            session: format!("{i:03}"),
        });
    }
    Ok(DatasetManifest::new(spec.face_w, spec.face_h, records))
}
