//! Model documents: JSON with reals printed to 17 significant digits.

use std::fmt::Write as _;

use serde_json::Value;

use super::linalg::Matrix;
use super::model::FisherModel;
use super::{FisherError, ModelLoadError};
use crate::emotion::EmotionLabel;

pub const MODEL_VERSION: u32 = 1;

fn push_reals(out: &mut String, key: &str, values: &[f64], last: bool) {
    write!(out, "  \"{key}\": [").unwrap();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{v:.16e}").unwrap();
    }
    out.push(']');
    out.push_str(if last { "\n" } else { ",\n" });
}

fn push_labels(out: &mut String, key: &str, labels: &[EmotionLabel]) {
    let names: Vec<String> = labels.iter().map(|l| format!("\"{}\"", l.name())).collect();
    writeln!(out, "  \"{key}\": [{}],", names.join(", ")).unwrap();
}

pub fn save_model(model: &FisherModel) -> String {
    let mut out = String::from("{\n");
    writeln!(out, "  \"version\": {MODEL_VERSION},").unwrap();
    writeln!(out, "  \"face_w\": {},", model.face_w).unwrap();
    writeln!(out, "  \"face_h\": {},", model.face_h).unwrap();
    push_labels(&mut out, "class_list", &model.class_list);
    push_labels(&mut out, "train_labels", &model.train_labels);
    push_reals(&mut out, "mean", &model.mean, false);
    push_reals(&mut out, "projection", model.projection.data(), false);
    push_reals(&mut out, "projected_train", model.projected_train.data(), true);
    out.push_str("}\n");
    out
}

fn field<'a>(doc: &'a Value, key: &str) -> Result<&'a Value, ModelLoadError> {
    doc.get(key).ok_or_else(|| ModelLoadError::Malformed(format!("missing field {key:?}")))
}

fn uint(doc: &Value, key: &str) -> Result<u32, ModelLoadError> {
    field(doc, key)?
        .as_u64()
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| ModelLoadError::Malformed(format!("{key:?} must be a non-negative integer")))
}

fn reals(doc: &Value, key: &str) -> Result<Vec<f64>, ModelLoadError> {
    let arr = field(doc, key)?
        .as_array()
        .ok_or_else(|| ModelLoadError::Malformed(format!("{key:?} must be an array")))?;
    arr.iter()
        .map(|v| v.as_f64().ok_or_else(|| ModelLoadError::Malformed(format!("{key:?} holds a non-number"))))
        .collect()
}

fn labels(doc: &Value, key: &str) -> Result<Vec<EmotionLabel>, ModelLoadError> {
    let arr = field(doc, key)?
        .as_array()
        .ok_or_else(|| ModelLoadError::Malformed(format!("{key:?} must be an array")))?;
    arr.iter()
        .map(|v| {
            v.as_str()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| ModelLoadError::Malformed(format!("{key:?} holds an unknown label {v}")))
        })
        .collect()
}

pub fn load_model(text: &str) -> Result<FisherModel, FisherError> {
    Ok(load_inner(text)?)
}

fn load_inner(text: &str) -> Result<FisherModel, ModelLoadError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Eof => ModelLoadError::Truncated(e.to_string()),
        _ => ModelLoadError::Malformed(e.to_string()),
    })?;
    let version = field(&doc, "version")?;
    if version.as_u64() != Some(MODEL_VERSION as u64) {
        return Err(ModelLoadError::Version(version.to_string()));
    }
    let face_w = uint(&doc, "face_w")?;
    let face_h = uint(&doc, "face_h")?;
    let class_list = labels(&doc, "class_list")?;
    let train_labels = labels(&doc, "train_labels")?;
    let mean = reals(&doc, "mean")?;
    let projection = reals(&doc, "projection")?;
    let projected_train = reals(&doc, "projected_train")?;

    let bad = |m: String| Err(ModelLoadError::Inconsistent(m));
    let d = face_w as usize * face_h as usize;
    if d == 0 || mean.len() != d {
        return bad(format!("mean has {} values, {face_w}x{face_h} needs {d}", mean.len()));
    }
    let mut sorted = class_list.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted != class_list || class_list.len() < 2 {
        return bad("class_list must hold at least 2 distinct labels in code order".into());
    }
    if projection.len() % d != 0 {
        return bad(format!("projection length {} is not a multiple of {d}", projection.len()));
    }
    let f = projection.len() / d;
    if f != class_list.len() - 1 {
        return bad(format!("projection has {f} component(s) but {} classes need {}", class_list.len(), class_list.len() - 1));
    }
    let n = train_labels.len();
    if projected_train.len() != n * f {
        return bad(format!("projected_train has {} values, {n} samples x {f} need {}", projected_train.len(), n * f));
    }
    if let Some(l) = train_labels.iter().find(|l| class_list.binary_search(l).is_err()) {
        return bad(format!("training label {l} missing from class_list"));
    }
    Ok(FisherModel {
        face_w,
        face_h,
        mean,
        projection: Matrix::from_vec(d, f, projection),
        projected_train: Matrix::from_vec(n, f, projected_train),
        train_labels,
        class_list,
    })
}
