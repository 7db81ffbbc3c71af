use fisherlens_web::{blob_scatter_json, default_cascade, detect_json, grayscale_rgba};
use serde_json::Value;

#[test]
fn grayscale_keeps_alpha() {
    let out = grayscale_rgba(&[134, 21, 107, 9, 0, 0, 0, 255], 2, 1, "luminosity").unwrap();
    assert_eq!(out, vec![64, 64, 64, 9, 0, 0, 0, 255]);
    assert_eq!(grayscale_rgba(&[134, 21, 107, 9], 1, 1, "average").unwrap()[0], 87);
    assert!(grayscale_rgba(&[0; 7], 2, 1, "average").is_err());
    assert!(grayscale_rgba(&[0; 4], 1, 1, "sepia").is_err());
}

#[test]
fn bundled_cascade_finds_nothing_on_flat_grey() {
    let model = default_cascade().unwrap();
    assert_eq!(model.stages.len(), 25);
    let rgba = vec![128u8; 4 * 80 * 80];
    assert_eq!(detect_json(&model, &rgba, 80, 80, 1.1, 3).unwrap(), "[]");
    assert!(detect_json(&model, &rgba, 80, 80, 1.0, 3).is_err());
}

#[test]
fn scatter_separates_blobs() {
    let doc: Value = serde_json::from_str(&blob_scatter_json(3, 30, 10.0, 42).unwrap()).unwrap();
    assert_eq!(doc["dims"], 2);
    assert_eq!(doc["points"].as_array().unwrap().len(), 90);
    assert!(doc["accuracy"].as_f64().unwrap() >= 0.95);
    assert_eq!(doc["points"][0]["coords"].as_array().unwrap().len(), 2);
    assert_eq!(blob_scatter_json(3, 30, 10.0, 42).unwrap(), blob_scatter_json(3, 30, 10.0, 42).unwrap());
    assert!(blob_scatter_json(1, 30, 10.0, 42).is_err());
    assert!(blob_scatter_json(3, 2, 10.0, 42).is_err());
}
