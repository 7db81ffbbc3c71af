use std::fs;
use std::path::PathBuf;

use fisherlens::cascade::{detect_face_sequence, detect_multiscale, load_cascade, load_cascade_sequence, DetectParams};
use fisherlens::dataset::Rng;
use fisherlens::imgproc::pnm;
use fisherlens::{GrayImage, GrayMethod, Rect};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn portraits() -> Vec<(String, GrayImage, Rect)> {
    let dir = data_dir().join("fixtures/portraits");
    let mut out = Vec::new();
    for name in ["astronaut.ppm", "hopper.ppm", "lfw_000.pgm", "lfw_005.pgm", "lfw_012.pgm"] {
        let img = pnm::read_gray(dir.join(name), GrayMethod::Luminosity).unwrap();
        let stem = name.split('.').next().unwrap();
        let ann: Rect = serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.face.json"))).unwrap()).unwrap();
        out.push((stem.to_string(), img, ann));
    }
    out
}

#[test]
fn default_cascade_has_25_stages() {
    let path = data_dir().join("cascades/01_frontalface_default.xml");
    let text = fs::read_to_string(&path).unwrap();
    let scanned = text.matches("<stage_threshold>").count();
    let model = load_cascade(&path).unwrap();
    assert_eq!(scanned, 25);
    assert_eq!(model.stages.len(), scanned);
    assert_eq!((model.window_w, model.window_h), (24, 24));
    assert_eq!(model.classifier_count(), text.matches("<threshold>").count());
}

#[test]
fn sequence_loads_sorted() {
    let seq = load_cascade_sequence(data_dir().join("cascades")).unwrap();
    let names: Vec<&str> = seq.iter().map(|m| m.name.as_str()).collect();
    assert_eq!(names, ["01_frontalface_default", "02_frontalface_alt", "04_frontalface_alt_tree"]);
}

#[test]
fn annotated_faces_found() {
    let model = load_cascade(data_dir().join("cascades/01_frontalface_default.xml")).unwrap();
    let mut hits = 0;
    for (name, img, ann) in portraits() {
        let dets = detect_multiscale(&model, &img, &DetectParams::default()).unwrap();
        let best = dets.iter().map(|d| d.rect.iou(&ann)).fold(0.0, f64::max);
        if best >= 0.5 {
            hits += 1;
        } else {
            eprintln!("{name}: best IoU {best:.3} over {} detection(s)", dets.len());
        }
    }
    assert!(hits >= 3, "{hits} of 5 portraits");
}

#[test]
fn single_face_portrait_gives_one_detection() {
    let (_, img, ann) = portraits().into_iter().find(|p| p.0 == "hopper").unwrap();
    let models = load_cascade_sequence(data_dir().join("cascades")).unwrap();
    let dets = detect_multiscale(&models[0], &img, &DetectParams::default()).unwrap();
    assert_eq!(dets.len(), 1);
    let face = detect_face_sequence(&models, &img, &DetectParams::default()).unwrap().unwrap();
    assert!(face.iou(&ann) >= 0.5);
}

#[test]
fn blank_and_noise_have_no_faces() {
    let models = load_cascade_sequence(data_dir().join("cascades")).unwrap();
    let mut rng = Rng::new(17);
    let noise = GrayImage::from_fn(200, 200, |_, _| (rng.next_u64() & 0xff) as u8);
    for img in [GrayImage::filled(200, 200, 0), GrayImage::filled(200, 200, 128), noise] {
        for m in &models {
            assert!(detect_multiscale(m, &img, &DetectParams::default()).unwrap().is_empty());
        }
        assert_eq!(detect_face_sequence(&models, &img, &DetectParams::default()).unwrap(), None);
    }
}

#[test]
fn threaded_and_serial_runs_identical() {
    let model = load_cascade(data_dir().join("cascades/01_frontalface_default.xml")).unwrap();
    for (_, img, _) in portraits() {
        let mt = detect_multiscale(&model, &img, &DetectParams { parallel: true, ..DetectParams::default() }).unwrap();
        let st = detect_multiscale(&model, &img, &DetectParams { parallel: false, ..DetectParams::default() }).unwrap();
        assert_eq!(serde_json::to_string(&mt).unwrap(), serde_json::to_string(&st).unwrap());
    }
}
