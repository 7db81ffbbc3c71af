//! Seeded train/test trials, repetition and reporting.

mod confusion;
mod report;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{split_indices, DatasetError, DatasetManifest, Rng};
use crate::emotion::EmotionLabel;
use crate::fisherface::{distinct, train_fisherface_with, FisherError, SampleMatrix, TrainOptions};
use crate::imgproc::{pnm, GrayImage, GrayMethod, ImageError};

pub use confusion::{top_confusions, ConfusionMatrix};
pub use report::{render_report, RenderedReport};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}: {source}")]
    Image { path: PathBuf, source: ImageError },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Fisher(#[from] FisherError),
}

/// Normalized faces with their labels, in manifest order.
#[derive(Debug, Clone)]
pub struct FaceSet {
    pub face_w: u32,
    pub face_h: u32,
    pub faces: Vec<GrayImage>,
    pub labels: Vec<EmotionLabel>,
}

impl FaceSet {
    pub fn new(faces: Vec<GrayImage>, labels: Vec<EmotionLabel>) -> Result<Self, EvalError> {
        let first = faces.first().ok_or(EvalError::Dataset(DatasetError::Empty))?;
        let (face_w, face_h) = (first.width(), first.height());
        if faces.len() != labels.len() {
            return Err(EvalError::InvalidArgument(format!("{} faces but {} labels", faces.len(), labels.len())));
        }
        if let Some(f) = faces.iter().find(|f| (f.width(), f.height()) != (face_w, face_h)) {
            return Err(EvalError::InvalidArgument(format!(
                "faces must share one size: found {}x{} and {face_w}x{face_h}",
                f.width(),
                f.height()
            )));
        }
        Ok(FaceSet { face_w, face_h, faces, labels })
    }

    /// Loads every record of a prepared manifest; all faces must match the
    /// manifest's face size.
    pub fn load(manifest: &DatasetManifest) -> Result<Self, EvalError> {
        if manifest.is_empty() {
            return Err(DatasetError::Empty.into());
        }
        let mut faces = Vec::with_capacity(manifest.len());
        for r in &manifest.records {
            let img = pnm::read_gray(&r.image_path, GrayMethod::Luminosity)
                .map_err(|source| EvalError::Image { path: r.image_path.clone(), source })?;
            if (img.width(), img.height()) != (manifest.face_w, manifest.face_h) {
                return Err(EvalError::InvalidArgument(format!(
                    "{} is {}x{}, manifest declares {}x{}; run prepare first",
                    r.image_path.display(),
                    img.width(),
                    img.height(),
                    manifest.face_w,
                    manifest.face_h
                )));
            }
            faces.push(img);
        }
        Self::new(faces, manifest.labels())
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn sample_matrix(&self, indices: &[usize]) -> Result<SampleMatrix, FisherError> {
        let faces: Vec<&GrayImage> = indices.iter().map(|&i| &self.faces[i]).collect();
        SampleMatrix::from_faces(&faces, indices.iter().map(|&i| self.labels[i]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub fraction: f64,
    pub subset: Option<Vec<EmotionLabel>>,
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pca_dims: Option<usize>,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig { seed: crate::dataset::DEFAULT_SEED, fraction: 0.8, subset: None, trials: 10, pca_dims: None }
    }
}

impl TrialConfig {
    /// Seed for trial `index`: `seed XOR index`.
    pub fn trial_seed(&self, index: u64) -> u64 {
        self.seed ^ index
    }

    fn validate(&self) -> Result<(), EvalError> {
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(EvalError::InvalidArgument(format!("train fraction must be in (0, 1), got {}", self.fraction)));
        }
        if self.trials == 0 {
            return Err(EvalError::InvalidArgument("at least one trial is required".into()));
        }
        if let Some(s) = &self.subset {
            if distinct(s).len() < 2 {
                return Err(EvalError::InvalidArgument("an emotion subset needs at least 2 classes".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

/// Record indices kept by the subset filter, in their original order.
fn filtered_indices(data: &FaceSet, cfg: &TrialConfig) -> Vec<usize> {
    (0..data.len())
        .filter(|&i| cfg.subset.as_ref().is_none_or(|s| s.contains(&data.labels[i])))
        .collect()
}

/// One seeded split/train/test round.
pub fn run_trial(data: &FaceSet, cfg: &TrialConfig, trial_index: u64) -> Result<TrialResult, EvalError> {
    cfg.validate()?;
    let kept = filtered_indices(data, cfg);
    let labels: Vec<EmotionLabel> = kept.iter().map(|&i| data.labels[i]).collect();
    let classes = distinct(&labels);
    if classes.len() < 2 {
        return Err(EvalError::InvalidArgument(format!(
            "evaluation needs at least 2 classes with data, found {}",
            classes.len()
        )));
    }

    let mut rng = Rng::new(cfg.trial_seed(trial_index));
    let (train, test) = split_indices(&labels, cfg.fraction, &mut rng)?;
    let train: Vec<usize> = train.into_iter().map(|i| kept[i]).collect();
    let test: Vec<usize> = test.into_iter().map(|i| kept[i]).collect();

    let model = train_fisherface_with(&data.sample_matrix(&train)?, &TrainOptions { pca_dims: cfg.pca_dims })?;
    let mut confusion = ConfusionMatrix::new(classes);
    for &i in &test {
        let p = crate::fisherface::predict(&model, &data.faces[i])?;
        confusion.record(data.labels[i], p.label);
    }
    Ok(TrialResult { accuracy: confusion.accuracy(), confusion })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub config: TrialConfig,
    pub per_trial: Vec<f64>,
    pub mean: f64,
    /// Sample (n - 1) standard deviation; 0 for a single trial.
    pub std: f64,
    pub pooled: ConfusionMatrix,
}

impl TrialReport {
    /// Aggregates per-trial results given in trial order.
    pub fn from_trials(config: TrialConfig, results: &[TrialResult]) -> Result<Self, EvalError> {
        let first = results.first().ok_or_else(|| EvalError::InvalidArgument("no trials to aggregate".into()))?;
        let mut pooled = ConfusionMatrix::new(first.confusion.classes.clone());
        for r in results {
            pooled.merge(&r.confusion);
        }
        let per_trial: Vec<f64> = results.iter().map(|r| r.accuracy).collect();
        let n = per_trial.len() as f64;
        let mean = per_trial.iter().sum::<f64>() / n;
        let std = if per_trial.len() > 1 {
            (per_trial.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(TrialReport { config, per_trial, mean, std, pooled })
    }

    pub fn min(&self) -> f64 {
        self.per_trial.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.per_trial.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs trials `0..cfg.trials` and aggregates them.
pub fn run_repeated(data: &FaceSet, cfg: &TrialConfig) -> Result<TrialReport, EvalError> {
    cfg.validate()?;
    let indices: Vec<u64> = (0..cfg.trials as u64).collect();
    #[cfg(feature = "parallel")]
    let results: Result<Vec<TrialResult>, EvalError> = {
        use rayon::prelude::*;
        indices.par_iter().map(|&t| run_trial(data, cfg, t)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Result<Vec<TrialResult>, EvalError> = indices.iter().map(|&t| run_trial(data, cfg, t)).collect();
    TrialReport::from_trials(cfg.clone(), &results?)
}
