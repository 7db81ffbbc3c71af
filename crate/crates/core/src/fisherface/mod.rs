//! Fisherface subspace learning: Gram-trick PCA followed by LDA, 1-NN
//! prediction in the projected space, and JSON persistence.

mod eigen;
mod lda;
pub mod linalg;
mod model;
mod pca;
mod persist;

use thiserror::Error;

use crate::emotion::EmotionLabel;
use crate::imgproc::GrayImage;

pub use eigen::{eigen_symmetric, SymmetricEigen, MAX_SWEEPS};
pub use lda::lda_fit;
pub use linalg::Matrix;
pub use model::{predict, train_fisherface, train_fisherface_with, FisherModel, Prediction, TrainOptions};
pub use pca::{pca_fit, PcaBasis};
pub use persist::{load_model, save_model, MODEL_VERSION};

#[derive(Debug, Error)]
pub enum FisherError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rank deficient: eigenvalue {index} is {value:e}; request at most {index} component(s)")]
    Rank { index: usize, value: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("face is {got_w}x{got_h}, model expects {expected_w}x{expected_h}")]
    Dimension { expected_w: u32, expected_h: u32, got_w: u32, got_h: u32 },
    #[error("model load failed: {0}")]
    Load(#[from] ModelLoadError),
}

#[derive(Debug, Error)]
pub enum ModelLoadError {
    #[error("unsupported model version {0}")]
    Version(String),
    #[error("document is truncated: {0}")]
    Truncated(String),
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("inconsistent dimensions: {0}")]
    Inconsistent(String),
}

/// Flattened training faces, one row per sample, intensities scaled to
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    pub face_w: u32,
    pub face_h: u32,
    pub rows: Matrix,
    pub labels: Vec<EmotionLabel>,
}

impl SampleMatrix {
    pub fn new(face_w: u32, face_h: u32, rows: Matrix, labels: Vec<EmotionLabel>) -> Result<Self, FisherError> {
        let d = face_w as usize * face_h as usize;
        if rows.cols() != d {
            return Err(FisherError::InvalidArgument(format!(
                "rows have {} values, {face_w}x{face_h} faces need {d}",
                rows.cols()
            )));
        }
        if rows.rows() != labels.len() {
            return Err(FisherError::InvalidArgument(format!("{} rows but {} labels", rows.rows(), labels.len())));
        }
        if rows.rows() < 2 {
            return Err(FisherError::InvalidArgument("need at least 2 samples".into()));
        }
        for class in distinct(&labels) {
            let count = labels.iter().filter(|&&l| l == class).count();
            if count < 2 {
                return Err(FisherError::InvalidArgument(format!("class {class} has {count} sample(s), needs at least 2")));
            }
        }
        Ok(SampleMatrix { face_w, face_h, rows, labels })
    }

    pub fn from_faces(faces: &[&GrayImage], labels: Vec<EmotionLabel>) -> Result<Self, FisherError> {
        let first = faces.first().ok_or_else(|| FisherError::InvalidArgument("no faces".into()))?;
        let (w, h) = (first.width(), first.height());
        let mut data = Vec::with_capacity(faces.len() * (w * h) as usize);
        for f in faces {
            if (f.width(), f.height()) != (w, h) {
                return Err(FisherError::Dimension { expected_w: w, expected_h: h, got_w: f.width(), got_h: f.height() });
            }
            data.extend(vectorize(f));
        }
        Self::new(w, h, Matrix::from_vec(faces.len(), (w * h) as usize, data), labels)
    }

    pub fn len(&self) -> usize {
        self.rows.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn classes(&self) -> Vec<EmotionLabel> {
        distinct(&self.labels)
    }
}

/// Row-major intensities divided by 255.
pub fn vectorize(face: &GrayImage) -> impl Iterator<Item = f64> + '_ {
    face.data().iter().map(|&v| v as f64 / 255.0)
}

pub(crate) fn distinct(labels: &[EmotionLabel]) -> Vec<EmotionLabel> {
    let mut c = labels.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}
