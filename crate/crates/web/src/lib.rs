//! Browser bindings: grayscale conversion, face detection with the bundled
//! frontal-face cascade, and a Fisher-space scatter of synthetic blob faces.
//!
//! Every export has a plain Rust twin returning `Result<_, String>` so the
//! logic can be tested natively.

use fisherlens::cascade::{detect_multiscale, parse_cascade, CascadeModel, DetectParams};
use fisherlens::dataset::{split_indices, Rng};
use fisherlens::fisherface::{train_fisherface, SampleMatrix};
use fisherlens::synth::{blob_face, BlobSpec};
use fisherlens::{GrayImage, GrayMethod, RgbImage};
use serde_json::json;
use wasm_bindgen::prelude::*;

const DEFAULT_CASCADE: &str = include_str!("../../../data/cascades/01_frontalface_default.xml");

fn rgba_to_rgb(rgba: &[u8], width: u32, height: u32) -> Result<RgbImage, String> {
    let n = width as usize * height as usize;
    if rgba.len() != 4 * n {
        return Err(format!("expected {} RGBA bytes for {width}x{height}, got {}", 4 * n, rgba.len()));
    }
    let rgb = rgba.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect();
    RgbImage::new(width, height, rgb).map_err(|e| e.to_string())
}

fn parse_method(method: &str) -> Result<GrayMethod, String> {
    match method {
        "average" => Ok(GrayMethod::Average),
        "luminosity" => Ok(GrayMethod::Luminosity),
        other => Err(format!("unknown grayscale method {other:?}")),
    }
}

/// Grayscale as RGBA (grey replicated, alpha kept) ready for `putImageData`.
pub fn grayscale_rgba(rgba: &[u8], width: u32, height: u32, method: &str) -> Result<Vec<u8>, String> {
    let gray = parse_method(method)?.apply(&rgba_to_rgb(rgba, width, height)?);
    Ok(gray.data().iter().zip(rgba.chunks_exact(4)).flat_map(|(&g, p)| [g, g, g, p[3]]).collect())
}

pub fn default_cascade() -> Result<CascadeModel, String> {
    let mut model = parse_cascade(DEFAULT_CASCADE).map_err(|e| e.to_string())?;
    model.name = "frontalface_default".into();
    Ok(model)
}

/// JSON array of `{x, y, w, h, neighbors}`, largest first.
pub fn detect_json(
    model: &CascadeModel,
    rgba: &[u8],
    width: u32,
    height: u32,
    scale_factor: f64,
    min_neighbors: usize,
) -> Result<String, String> {
    let gray = GrayMethod::Luminosity.apply(&rgba_to_rgb(rgba, width, height)?);
    let params = DetectParams { scale_factor, min_neighbors, parallel: false, ..DetectParams::default() };
    let found = detect_multiscale(model, &gray, &params).map_err(|e| e.to_string())?;
    let out: Vec<_> = found
        .iter()
        .map(|d| json!({"x": d.rect.x, "y": d.rect.y, "w": d.rect.w, "h": d.rect.h, "neighbors": d.neighbors}))
        .collect();
    Ok(serde_json::Value::from(out).to_string())
}

/// Trains on 80% of a blob set and projects every face into Fisher space.
///
/// Returns `{classes, dims, accuracy, points: [{label, train, correct, coords}]}`.
pub fn blob_scatter_json(classes: usize, per_class: usize, noise: f64, seed: u64) -> Result<String, String> {
    if !(2..=8).contains(&classes) {
        return Err(format!("classes must be in 2..=8, got {classes}"));
    }
    if per_class < 3 {
        return Err("at least 3 faces per class are needed".into());
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(format!("noise must be a non-negative number, got {noise}"));
    }
    let spec = BlobSpec { classes, per_class, noise, seed, ..BlobSpec::default() };
    let labels_all = spec.labels();
    let mut rng = Rng::new(seed);
    let mut faces: Vec<GrayImage> = Vec::new();
    let mut labels = Vec::new();
    for (c, &l) in labels_all.iter().enumerate() {
        for _ in 0..per_class {
            faces.push(blob_face(&spec, c, &mut rng));
            labels.push(l);
        }
    }
    let (train, test) = split_indices(&labels, 0.8, &mut rng).map_err(|e| e.to_string())?;
    let train_faces: Vec<&GrayImage> = train.iter().map(|&i| &faces[i]).collect();
    let x = SampleMatrix::from_faces(&train_faces, train.iter().map(|&i| labels[i]).collect()).map_err(|e| e.to_string())?;
    let model = train_fisherface(&x).map_err(|e| e.to_string())?;

    let mut points = Vec::with_capacity(faces.len());
    let mut hits = 0;
    for (i, face) in faces.iter().enumerate() {
        let is_train = !test.contains(&i);
        let coords = model.project_face(face).map_err(|e| e.to_string())?;
        let predicted = model.predict_vector(&face.data().iter().map(|&v| v as f64 / 255.0).collect::<Vec<_>>());
        let correct = predicted.map_err(|e| e.to_string())?.label == labels[i];
        if !is_train && correct {
            hits += 1;
        }
        points.push(json!({"label": labels[i].name(), "train": is_train, "correct": correct, "coords": coords}));
    }
    let names: Vec<&str> = labels_all.iter().map(|l| l.name()).collect();
    Ok(json!({
        "classes": names,
        "dims": model.dims(),
        "accuracy": hits as f64 / test.len() as f64,
        "points": points,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn grayscale(rgba: &[u8], width: u32, height: u32, method: &str) -> Result<Vec<u8>, JsValue> {
    grayscale_rgba(rgba, width, height, method).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub struct FaceDetector {
    model: CascadeModel,
}

#[wasm_bindgen]
impl FaceDetector {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Result<FaceDetector, JsValue> {
        default_cascade().map(|model| FaceDetector { model }).map_err(|e| JsValue::from_str(&e))
    }

    pub fn detect(
        &self,
        rgba: &[u8],
        width: u32,
        height: u32,
        scale_factor: f64,
        min_neighbors: usize,
    ) -> Result<String, JsValue> {
        detect_json(&self.model, rgba, width, height, scale_factor, min_neighbors).map_err(|e| JsValue::from_str(&e))
    }
}

#[wasm_bindgen]
pub fn blob_scatter(classes: usize, per_class: usize, noise: f64, seed: u32) -> Result<String, JsValue> {
    blob_scatter_json(classes, per_class, noise, seed as u64).map_err(|e| JsValue::from_str(&e))
}
