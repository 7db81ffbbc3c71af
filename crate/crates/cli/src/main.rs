mod exit;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fisherlens::cascade::{detect_multiscale, load_cascade_sequence, CascadeModel, DetectParams, Detection};
use fisherlens::dataset::{ingest_ck, prepare_faces, split_indices, DatasetManifest, PrepareOptions, Rng, DEFAULT_SEED};
use fisherlens::eval::{render_report, run_repeated, FaceSet, TrialConfig};
use fisherlens::fisherface::{load_model, predict, save_model, train_fisherface_with, TrainOptions};
use fisherlens::imgproc::{self, pnm, ImageError, RgbImage};
use fisherlens::synth::{write_blob_dataset, BlobSpec};
use fisherlens::{EmotionLabel, GrayImage, GrayMethod, Rect};
use serde_json::json;

use exit::CliError;

#[derive(Parser, Debug)]
#[command(name = "fisherlens", version, about = "Facial expression recognition with Haar cascades and Fisherfaces")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a manifest from a CK-style images/labels tree.
    Ingest(IngestArgs),
    /// Detect, crop and normalize every face in a manifest.
    Prepare(PrepareArgs),
    /// Train a Fisherface model on the training part of a seeded split.
    Train(TrainArgs),
    /// Repeated seeded train/test trials with a confusion report.
    Eval(EvalArgs),
    /// Classify one face image.
    Predict(PredictArgs),
    /// Run the cascade sequence over one image.
    Detect(DetectArgs),
    /// Grayscale conversion with either formula.
    Gray(GrayArgs),
    /// Write the synthetic blob dataset and its manifest.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    out_args: OutArgs,
}

#[derive(Args, Debug)]
struct PrepareArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Cascade XML file or directory of `*.xml` files, tried in name order.
    #[arg(long, default_value = "data/cascades")]
    cascades: PathBuf,
    #[arg(long)]
    out_root: PathBuf,
    /// Prepared manifest path [default: <out-root>/manifest.json]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "48x48", value_parser = parse_size)]
    size: (u32, u32),
    #[arg(long, default_value = "luminosity", value_parser = parse_gray)]
    gray: GrayMethod,
    #[command(flatten)]
    out_args: OutArgs,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long, env = "FISHERLENS_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Training fraction per class, strictly between 0 and 1.
    #[arg(long, default_value = "0.8", value_parser = parse_fraction)]
    split: f64,
    /// Emotion names or codes to keep, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_label)]
    subset: Option<Vec<EmotionLabel>>,
    /// PCA dimension [default: n - c, capped by the data rank]
    #[arg(long)]
    pca_dims: Option<usize>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    split: SplitArgs,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    out_args: OutArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    split: SplitArgs,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Machine-readable report path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    out_args: OutArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    /// Input is a full image: detect, crop and resize the face first.
    #[arg(long)]
    raw_image: bool,
    #[arg(long, default_value = "data/cascades")]
    cascades: PathBuf,
    #[arg(long, default_value = "luminosity", value_parser = parse_gray)]
    gray: GrayMethod,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[arg(long, default_value = "data/cascades")]
    cascades: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    /// Detections document path [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "luminosity", value_parser = parse_gray)]
    gray: GrayMethod,
    #[arg(long, default_value_t = 1.1)]
    scale_factor: f64,
    #[arg(long, default_value_t = 3)]
    min_neighbors: usize,
    #[arg(long, default_value_t = 24)]
    min_size: u32,
    /// Scan scales on the current thread only.
    #[arg(long)]
    serial: bool,
    #[command(flatten)]
    out_args: OutArgs,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "source")]
struct GraySource {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Convert one pixel given as R,G,B and print both formulas.
    #[arg(long, value_parser = parse_rgb)]
    rgb: Option<[u8; 3]>,
}

#[derive(Args, Debug)]
struct GrayArgs {
    #[command(flatten)]
    source: GraySource,
    #[arg(long, required_unless_present = "rgb")]
    out: Option<PathBuf>,
    #[arg(long, default_value = "luminosity", value_parser = parse_gray)]
    method: GrayMethod,
    #[command(flatten)]
    out_args: OutArgs,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    out_root: PathBuf,
    /// Manifest path [default: <out-root>/manifest.json]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..=8))]
    classes: u64,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(2..))]
    per_class: u64,
    #[arg(long, default_value = "16x16", value_parser = parse_size)]
    size: (u32, u32),
    /// Noise standard deviation in grey levels.
    #[arg(long, default_value_t = 10.0)]
    noise: f64,
    #[arg(long, env = "FISHERLENS_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    out_args: OutArgs,
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w: u32 = w.trim().parse().map_err(|_| format!("bad width in {s:?}"))?;
    let h: u32 = h.trim().parse().map_err(|_| format!("bad height in {s:?}"))?;
    if w < 3 || h < 3 {
        return Err(format!("size must be at least 3x3, got {w}x{h}"));
    }
    Ok((w, h))
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let f: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if f > 0.0 && f < 1.0 {
        Ok(f)
    } else {
        Err(format!("fraction must be strictly between 0 and 1, got {f}"))
    }
}

fn parse_label(s: &str) -> Result<EmotionLabel, String> {
    s.trim().parse::<EmotionLabel>().map_err(|e| e.to_string())
}

fn parse_gray(s: &str) -> Result<GrayMethod, String> {
    s.parse::<GrayMethod>().map_err(|e| e.to_string())
}

fn parse_rgb(s: &str) -> Result<[u8; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected R,G,B, got {s:?}"));
    }
    let mut out = [0u8; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|_| format!("channel {p:?} is not in 0..=255"))?;
    }
    Ok(out)
}

fn check_out(path: &Path, out: &OutArgs) -> Result<(), CliError> {
    if path.exists() && !out.force {
        return Err(CliError::usage(format!("{} already exists; pass --force to overwrite", path.display())));
    }
    Ok(())
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn read_gray(path: &Path, method: GrayMethod) -> Result<GrayImage, CliError> {
    pnm::read_gray(path, method).map_err(|e| {
        let err = CliError::from(e);
        CliError { message: format!("{}: {}", path.display(), err.message), ..err }
    })
}

fn load_cascades(path: &Path) -> Result<Vec<CascadeModel>, CliError> {
    Ok(load_cascade_sequence(path)?)
}

fn cmd_ingest(a: IngestArgs) -> Result<(), CliError> {
    check_out(&a.out, &a.out_args)?;
    let manifest = ingest_ck(&a.images, &a.labels)?;
    manifest.save(&a.out)?;
    println!("{} record(s), {} class(es) -> {}", manifest.len(), manifest.classes().len(), a.out.display());
    Ok(())
}

fn cmd_prepare(a: PrepareArgs) -> Result<(), CliError> {
    let out = a.out.clone().unwrap_or_else(|| a.out_root.join("manifest.json"));
    check_out(&out, &a.out_args)?;
    let manifest = DatasetManifest::load(&a.manifest)?;
    let cascades = load_cascades(&a.cascades)?;
    let opts = PrepareOptions { face_w: a.size.0, face_h: a.size.1, gray: a.gray, ..PrepareOptions::default() };
    let (prepared, report) = prepare_faces(&manifest, &cascades, &a.out_root, &opts)?;
    prepared.save(&out)?;
    for s in &report.skipped {
        eprintln!("skipped {}: {}", s.image_path.display(), s.reason);
    }
    println!(
        "{} face(s) prepared, {} skipped -> {}",
        report.prepared,
        report.skipped.len(),
        out.display()
    );
    Ok(())
}

fn load_faces(path: &Path, subset: Option<&[EmotionLabel]>) -> Result<FaceSet, CliError> {
    let mut manifest = DatasetManifest::load(path)?;
    if let Some(s) = subset {
        manifest = manifest.filter_labels(s);
        if manifest.classes().len() < 2 {
            return Err(CliError::usage(format!(
                "subset leaves {} class(es) with data; at least 2 are needed",
                manifest.classes().len()
            )));
        }
    }
    Ok(FaceSet::load(&manifest)?)
}

fn cmd_train(a: TrainArgs) -> Result<(), CliError> {
    check_out(&a.out, &a.out_args)?;
    let data = load_faces(&a.manifest, a.split.subset.as_deref())?;
    let mut rng = Rng::new(a.split.seed);
    let (train, test) = split_indices(&data.labels, a.split.split, &mut rng)?;
    let model = train_fisherface_with(&data.sample_matrix(&train)?, &TrainOptions { pca_dims: a.split.pca_dims })?;
    write_file(&a.out, save_model(&model))?;
    let correct = test
        .iter()
        .map(|&i| predict(&model, &data.faces[i]).map(|p| p.label == data.labels[i]))
        .collect::<Result<Vec<bool>, _>>()?
        .into_iter()
        .filter(|&c| c)
        .count();
    println!(
        "trained on {} face(s), {} class(es), {} Fisher dimension(s); held-out accuracy {:.4} ({}/{}) -> {}",
        train.len(),
        model.class_list.len(),
        model.dims(),
        correct as f64 / test.len() as f64,
        correct,
        test.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<(), CliError> {
    if let Some(out) = &a.out {
        check_out(out, &a.out_args)?;
    }
    let cfg = TrialConfig {
        seed: a.split.seed,
        fraction: a.split.split,
        subset: a.split.subset.clone(),
        trials: a.trials as usize,
        pca_dims: a.split.pca_dims,
    };
    if let Some(s) = &cfg.subset {
        let mut d = s.clone();
        d.sort_unstable();
        d.dedup();
        if d.len() < 2 {
            return Err(CliError::usage("--subset needs at least 2 distinct emotions"));
        }
    }
    let data = load_faces(&a.manifest, None)?;
    let report = run_repeated(&data, &cfg)?;
    let rendered = render_report(&report);
    print!("{}", rendered.text);
    if let Some(out) = &a.out {
        write_file(out, &rendered.json)?;
    }
    Ok(())
}

fn detect_params(a: &DetectArgs) -> Result<DetectParams, CliError> {
    if !(a.scale_factor > 1.0) {
        return Err(CliError::usage(format!("--scale-factor must exceed 1, got {}", a.scale_factor)));
    }
    Ok(DetectParams {
        scale_factor: a.scale_factor,
        min_neighbors: a.min_neighbors,
        min_size: a.min_size,
        parallel: !a.serial && DetectParams::default().parallel,
        ..DetectParams::default()
    })
}

/// First cascade with any detection, and all of its detections.
fn detect_sequence(
    cascades: &[CascadeModel],
    img: &GrayImage,
    params: &DetectParams,
) -> Result<Option<(usize, Vec<Detection>)>, CliError> {
    for (i, m) in cascades.iter().enumerate() {
        let d = detect_multiscale(m, img, params)?;
        if !d.is_empty() {
            return Ok(Some((i, d)));
        }
    }
    Ok(None)
}

fn rect_json(r: &Rect) -> serde_json::Value {
    json!({"x": r.x, "y": r.y, "w": r.w, "h": r.h})
}

fn cmd_detect(a: DetectArgs) -> Result<(), CliError> {
    let params = detect_params(&a)?;
    if let Some(out) = &a.out {
        check_out(out, &a.out_args)?;
    }
    let cascades = load_cascades(&a.cascades)?;
    let img = read_gray(&a.input, a.gray)?;
    let found = detect_sequence(&cascades, &img, &params)?;
    let (cascade, dets) = match &found {
        Some((i, d)) => (Some(cascades[*i].name.as_str()), d.as_slice()),
        None => (None, &[][..]),
    };
    let doc = json!({
        "image": a.input.display().to_string(),
        "width": img.width(),
        "height": img.height(),
        "cascade": cascade,
        "face": dets.first().map(|d| rect_json(&d.rect)),
        "detections": dets
            .iter()
            .map(|d| json!({"x": d.rect.x, "y": d.rect.y, "w": d.rect.w, "h": d.rect.h, "neighbors": d.neighbors}))
            .collect::<Vec<_>>(),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("detections serialize");
    text.push('\n');
    match &a.out {
        Some(out) => {
            write_file(out, &text)?;
            println!("{} detection(s) -> {}", dets.len(), out.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.model).map_err(|e| CliError::io(format!("{}: {e}", a.model.display())))?;
    let model = load_model(&text).map_err(|e| CliError::usage(format!("{}: {e}", a.model.display())))?;
    let img = read_gray(&a.input, a.gray)?;
    let face = if a.raw_image {
        let cascades = load_cascades(&a.cascades)?;
        let (_, dets) = detect_sequence(&cascades, &img, &DetectParams::default())?
            .ok_or_else(|| CliError::empty(format!("no face found in {}", a.input.display())))?;
        let cropped = imgproc::crop(&img, dets[0].rect)?;
        log::info!("face at {}", dets[0].rect);
        imgproc::resize_bilinear(&cropped, model.face_w, model.face_h)?
    } else {
        img
    };
    let p = predict(&model, &face)?;
    match p.runner_up {
        Some((l, d)) => println!("{} distance={:.6e} runner_up={}:{:.6e}", p.label, p.distance, l, d),
        None => println!("{} distance={:.6e}", p.label, p.distance),
    }
    Ok(())
}

fn cmd_gray(a: GrayArgs) -> Result<(), CliError> {
    if let Some(rgb) = a.source.rgb {
        let px = RgbImage::new(1, 1, rgb.to_vec()).map_err(|e: ImageError| CliError::usage(e.to_string()))?;
        println!("average {}", GrayMethod::Average.apply(&px).data()[0]);
        println!("luminosity {}", GrayMethod::Luminosity.apply(&px).data()[0]);
        return Ok(());
    }
    let (input, out) = (a.source.input.expect("clap group"), a.out.expect("clap requires --out"));
    check_out(&out, &a.out_args)?;
    let img = read_gray(&input, a.method)?;
    write_file(&out, pnm::encode_pgm(&img))?;
    println!("{}x{} {} -> {}", img.width(), img.height(), a.method.as_str(), out.display());
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<(), CliError> {
    let out = a.out.clone().unwrap_or_else(|| a.out_root.join("manifest.json"));
    check_out(&out, &a.out_args)?;
    if !(a.noise >= 0.0) {
        return Err(CliError::usage(format!("--noise must be non-negative, got {}", a.noise)));
    }
    let spec = BlobSpec {
        face_w: a.size.0,
        face_h: a.size.1,
        classes: a.classes as usize,
        per_class: a.per_class as usize,
        noise: a.noise,
        seed: a.seed,
    };
    let manifest = write_blob_dataset(&spec, &a.out_root)?;
    manifest.save(&out)?;
    println!("{} blob face(s), {} class(es) -> {}", manifest.len(), spec.classes, out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Prepare(a) => cmd_prepare(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Gray(a) => cmd_gray(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
