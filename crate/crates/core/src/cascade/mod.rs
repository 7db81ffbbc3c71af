//! Stump-based Haar cascades: parsing and multi-scale detection.

mod detect;
mod parse;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dataset::glob::{list_matching, GlobPattern};
use crate::imgproc::Rect;

pub use detect::{
    detect_face_sequence, detect_face_sequence_traced, detect_multiscale, eval_window,
    feature_response, group_rects, window_sigma, DetectParams, Detection, ScaledCascade,
    SequenceOutcome,
};
pub use parse::parse_cascade;

#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("malformed cascade XML at line {line}, column {column}: {message}")]
    Xml { line: u32, column: u32, message: String },
    #[error("invalid cascade at line {line}: {message}")]
    Schema { line: u32, message: String },
    #[error("unsupported cascade construct at line {line}: {construct}")]
    Unsupported { line: u32, construct: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    File { path: PathBuf, source: Box<CascadeError> },
}

/// One weighted rectangle of a Haar feature, in base-window coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarRect {
    pub rect: Rect,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HaarFeature {
    pub rects: Vec<HaarRect>,
}

/// A decision stump over one feature.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakClassifier {
    pub feature: HaarFeature,
    pub threshold: f64,
    pub left_val: f64,
    pub right_val: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub classifiers: Vec<WeakClassifier>,
    pub stage_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeModel {
    pub name: String,
    pub window_w: u32,
    pub window_h: u32,
    pub stages: Vec<Stage>,
}

impl CascadeModel {
    pub fn classifier_count(&self) -> usize {
        self.stages.iter().map(|s| s.classifiers.len()).sum()
    }
}

/// Parses a cascade file, naming the model after the file stem.
pub fn load_cascade(path: impl AsRef<Path>) -> Result<CascadeModel, CascadeError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| CascadeError::Io { path: path.to_path_buf(), source })?;
    let mut model = parse_cascade(&text)
        .map_err(|e| CascadeError::File { path: path.to_path_buf(), source: Box::new(e) })?;
    if let Some(stem) = path.file_stem() {
        model.name = stem.to_string_lossy().into_owned();
    }
    Ok(model)
}

/// Loads a detection sequence: a single cascade file, or every `*.xml` in a
/// directory in lexicographic order.
pub fn load_cascade_sequence(path: impl AsRef<Path>) -> Result<Vec<CascadeModel>, CascadeError> {
    let path = path.as_ref();
    let meta = fs::metadata(path)
        .map_err(|source| CascadeError::Io { path: path.to_path_buf(), source })?;
    if meta.is_file() {
        return Ok(vec![load_cascade(path)?]);
    }
    let pattern = GlobPattern::new("*.xml").expect("static pattern");
    let files = list_matching(path, &pattern)
        .map_err(|source| CascadeError::Io { path: path.to_path_buf(), source })?;
    if files.is_empty() {
        return Err(CascadeError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no *.xml cascades in directory"),
        });
    }
    files.iter().map(load_cascade).collect()
}
