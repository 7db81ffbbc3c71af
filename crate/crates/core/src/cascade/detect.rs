use serde::{Deserialize, Serialize};

use super::{CascadeError, CascadeModel, HaarFeature};
use crate::imgproc::{GrayImage, IntegralImage, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Detection {
    pub rect: Rect,
    /// Number of raw window hits merged into this detection.
    pub neighbors: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectParams {
    pub scale_factor: f64,
    pub min_neighbors: usize,
    pub min_size: u32,
    /// Similarity tolerance used when grouping raw hits.
    pub group_eps: f64,
    /// Evaluate scales on the rayon pool. Output is identical either way.
    pub parallel: bool,
}

impl Default for DetectParams {
    fn default() -> Self {
        DetectParams {
            scale_factor: 1.1,
            min_neighbors: 3,
            min_size: 24,
            group_eps: 0.2,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

fn round_half_up(v: f64) -> u32 {
    (v + 0.5).floor().max(0.0) as u32
}

#[derive(Debug, Clone, Copy)]
struct ScaledRect {
    rect: Rect,
    weight: f64,
}

#[derive(Debug, Clone)]
struct ScaledStump {
    rects: [ScaledRect; 3],
    len: usize,
    threshold: f64,
    left_val: f64,
    right_val: f64,
}

#[derive(Debug, Clone)]
struct ScaledStage {
    stumps: Vec<ScaledStump>,
    threshold: f64,
}

/// A cascade with every feature rectangle pre-scaled for one scale.
#[derive(Debug, Clone)]
pub struct ScaledCascade {
    window_w: u32,
    window_h: u32,
    stages: Vec<ScaledStage>,
}

fn scale_rect(r: Rect, scale: f64, window_w: u32, window_h: u32) -> Rect {
    let x = round_half_up(r.x as f64 * scale).min(window_w - 1);
    let y = round_half_up(r.y as f64 * scale).min(window_h - 1);
    // Independent rounding may push the far edge one pixel past the window.
    let w = round_half_up(r.w as f64 * scale).clamp(1, window_w - x);
    let h = round_half_up(r.h as f64 * scale).clamp(1, window_h - y);
    Rect::new(x, y, w, h)
}

impl ScaledCascade {
    pub fn new(model: &CascadeModel, scale: f64) -> Self {
        let window_w = round_half_up(model.window_w as f64 * scale).max(1);
        let window_h = round_half_up(model.window_h as f64 * scale).max(1);
        let stages = model
            .stages
            .iter()
            .map(|stage| ScaledStage {
                threshold: stage.stage_threshold,
                stumps: stage
                    .classifiers
                    .iter()
                    .map(|c| {
                        let mut rects = [ScaledRect { rect: Rect::new(0, 0, 0, 0), weight: 0.0 }; 3];
                        for (slot, hr) in rects.iter_mut().zip(&c.feature.rects) {
                            *slot = ScaledRect {
                                rect: scale_rect(hr.rect, scale, window_w, window_h),
                                weight: hr.weight,
                            };
                        }
                        ScaledStump {
                            rects,
                            len: c.feature.rects.len().min(3),
                            threshold: c.threshold,
                            left_val: c.left_val,
                            right_val: c.right_val,
                        }
                    })
                    .collect(),
            })
            .collect();
        ScaledCascade { window_w, window_h, stages }
    }

    pub fn window_size(&self) -> (u32, u32) {
        (self.window_w, self.window_h)
    }

    fn area(&self) -> f64 {
        self.window_w as f64 * self.window_h as f64
    }

    /// Runs every stage on the window whose top-left corner is `(x, y)`.
    pub fn passes(&self, ii: &IntegralImage, x: u32, y: u32) -> bool {
        let area = self.area();
        let window = Rect::new(x, y, self.window_w, self.window_h);
        let sigma = sigma_from(ii, window, area);
        for stage in &self.stages {
            let mut sum = 0.0;
            for stump in &stage.stumps {
                let mut f = 0.0;
                for r in &stump.rects[..stump.len] {
                    f += r.weight * ii.rect_sum(r.rect.translate(&window)) as f64;
                }
                f /= area;
                sum += if f < stump.threshold * sigma { stump.left_val } else { stump.right_val };
            }
            if sum < stage.threshold {
                return false;
            }
        }
        true
    }
}

fn sigma_from(ii: &IntegralImage, window: Rect, area: f64) -> f64 {
    let mean = ii.rect_sum(window) as f64 / area;
    let var = ii.rect_squared_sum(window) as f64 / area - mean * mean;
    if var > 0.0 {
        var.sqrt()
    } else {
        1.0
    }
}

/// Intensity standard deviation of `window`, or 1 when the variance is not
/// positive.
pub fn window_sigma(ii: &IntegralImage, window: Rect) -> f64 {
    sigma_from(ii, window, window.area() as f64)
}

/// Area-normalized feature value `sum(weight * rect_sum) / area` for a
/// feature scaled into `window`.
pub fn feature_response(feature: &HaarFeature, ii: &IntegralImage, window: Rect, scale: f64) -> f64 {
    let mut f = 0.0;
    for hr in &feature.rects {
        let r = scale_rect(hr.rect, scale, window.w, window.h);
        f += hr.weight * ii.rect_sum(r.translate(&window)) as f64;
    }
    f / window.area() as f64
}

/// Cascade verdict for a single window at `scale`.
///
/// `window` must lie inside the image with dimensions equal to the base
/// window times `scale` (rounded).
pub fn eval_window(model: &CascadeModel, ii: &IntegralImage, window: Rect, scale: f64) -> bool {
    let scaled = ScaledCascade::new(model, scale);
    debug_assert_eq!(scaled.window_size(), (window.w, window.h));
    scaled.passes(ii, window.x, window.y)
}

fn scan_scale(model: &CascadeModel, ii: &IntegralImage, scale: f64) -> Vec<Rect> {
    let scaled = ScaledCascade::new(model, scale);
    let (ww, wh) = scaled.window_size();
    let step = round_half_up(scale).max(1) as usize;
    let mut hits = Vec::new();
    for y in (0..=ii.height() - wh).step_by(step) {
        for x in (0..=ii.width() - ww).step_by(step) {
            if scaled.passes(ii, x, y) {
                hits.push(Rect::new(x, y, ww, wh));
            }
        }
    }
    hits
}

fn scales_for(model: &CascadeModel, img: &GrayImage, params: &DetectParams) -> Vec<f64> {
    let mut scales = Vec::new();
    let mut s = 1.0f64;
    loop {
        let ww = round_half_up(model.window_w as f64 * s);
        let wh = round_half_up(model.window_h as f64 * s);
        if ww > img.width() || wh > img.height() {
            break;
        }
        if ww >= params.min_size && wh >= params.min_size {
            scales.push(s);
        }
        s *= params.scale_factor;
    }
    scales
}

/// Multi-scale sliding-window detection followed by hit grouping.
///
/// Detections come back sorted by descending area, then ascending `(y, x)`.
pub fn detect_multiscale(
    model: &CascadeModel,
    img: &GrayImage,
    params: &DetectParams,
) -> Result<Vec<Detection>, CascadeError> {
    if !(params.scale_factor > 1.0) {
        return Err(CascadeError::InvalidArgument(format!(
            "scale factor must exceed 1, got {}",
            params.scale_factor
        )));
    }
    let scales = scales_for(model, img, params);
    if scales.is_empty() {
        return Ok(Vec::new());
    }
    let ii = IntegralImage::new(img);

    let per_scale: Vec<Vec<Rect>> = if params.parallel {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            scales.par_iter().map(|&s| scan_scale(model, &ii, s)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            scales.iter().map(|&s| scan_scale(model, &ii, s)).collect()
        }
    } else {
        scales.iter().map(|&s| scan_scale(model, &ii, s)).collect()
    };
    let mut raw: Vec<Rect> = per_scale.into_iter().flatten().collect();
    raw.sort_unstable_by_key(|r| (r.y, r.x, r.w, r.h));
    Ok(group_rects(&raw, params.min_neighbors, params.group_eps))
}

fn similar(a: &Rect, b: &Rect, eps: f64) -> bool {
    let dw = eps * a.w.min(b.w) as f64;
    let dh = eps * a.h.min(b.h) as f64;
    let diff = |p: u32, q: u32| (p as f64 - q as f64).abs();
    diff(a.x, b.x) <= dw && diff(a.w, b.w) <= dw && diff(a.y, b.y) <= dh && diff(a.h, b.h) <= dh
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Clusters raw hits under the transitive closure of the similarity
/// predicate and averages each cluster with at least `min_neighbors` members.
pub fn group_rects(raw: &[Rect], min_neighbors: usize, eps: f64) -> Vec<Detection> {
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if similar(&raw[i], &raw[j], eps) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }

    let mut sums: std::collections::BTreeMap<usize, [u64; 5]> = Default::default();
    for (i, r) in raw.iter().enumerate() {
        let root = find(&mut parent, i);
        let acc = sums.entry(root).or_default();
        acc[0] += r.x as u64;
        acc[1] += r.y as u64;
        acc[2] += r.w as u64;
        acc[3] += r.h as u64;
        acc[4] += 1;
    }

    let threshold = min_neighbors.max(1) as u64;
    let mean = |s: u64, n: u64| ((2 * s + n) / (2 * n)) as u32;
    let mut out: Vec<Detection> = sums
        .values()
        .filter(|acc| acc[4] >= threshold)
        .map(|acc| Detection {
            rect: Rect::new(mean(acc[0], acc[4]), mean(acc[1], acc[4]), mean(acc[2], acc[4]), mean(acc[3], acc[4])),
            neighbors: acc[4] as usize,
        })
        .collect();
    sort_detections(&mut out);
    out
}

fn sort_detections(d: &mut [Detection]) {
    d.sort_by(|a, b| {
        b.rect
            .area()
            .cmp(&a.rect.area())
            .then(a.rect.y.cmp(&b.rect.y))
            .then(a.rect.x.cmp(&b.rect.x))
            .then(a.rect.w.cmp(&b.rect.w))
            .then(a.neighbors.cmp(&b.neighbors))
    });
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceOutcome {
    pub face: Option<Rect>,
    /// Index of the cascade that produced `face`.
    pub model_index: Option<usize>,
    /// How many cascades were run before stopping.
    pub consulted: usize,
}

/// Runs the cascades in order; the first one with any detection wins and
/// its largest detection is returned.
pub fn detect_face_sequence_traced(
    models: &[CascadeModel],
    img: &GrayImage,
    params: &DetectParams,
) -> Result<SequenceOutcome, CascadeError> {
    if models.is_empty() {
        return Err(CascadeError::InvalidArgument("face detection needs at least one cascade".into()));
    }
    for (i, model) in models.iter().enumerate() {
        let dets = detect_multiscale(model, img, params)?;
        if let Some(best) = dets.first() {
            return Ok(SequenceOutcome { face: Some(best.rect), model_index: Some(i), consulted: i + 1 });
        }
    }
    Ok(SequenceOutcome { face: None, model_index: None, consulted: models.len() })
}

pub fn detect_face_sequence(
    models: &[CascadeModel],
    img: &GrayImage,
    params: &DetectParams,
) -> Result<Option<Rect>, CascadeError> {
    Ok(detect_face_sequence_traced(models, img, params)?.face)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{HaarRect, Stage, WeakClassifier};
    use proptest::prelude::*;

    fn stump(rects: &[(Rect, f64)], threshold: f64, left: f64, right: f64) -> WeakClassifier {
        WeakClassifier {
            feature: HaarFeature { rects: rects.iter().map(|&(rect, weight)| HaarRect { rect, weight }).collect() },
            threshold,
            left_val: left,
            right_val: right,
        }
    }

    fn one_stage(c: WeakClassifier, stage_threshold: f64) -> CascadeModel {
        CascadeModel {
            name: "t".into(),
            window_w: 4,
            window_h: 4,
            stages: vec![Stage { classifiers: vec![c], stage_threshold }],
        }
    }

    fn left_right() -> WeakClassifier {
        stump(&[(Rect::new(0, 0, 2, 4), -1.0), (Rect::new(2, 0, 2, 4), 1.0)], 0.0, -1.0, 1.0)
    }

    #[test]
    fn vacuous_stage_accepts_everything() {
        let m = one_stage(left_right(), -1e30);
        let img = GrayImage::from_fn(9, 7, |x, y| (x * 31 + y * 17) as u8);
        let ii = IntegralImage::new(&img);
        for y in 0..=3 {
            for x in 0..=5 {
                assert!(eval_window(&m, &ii, Rect::new(x, y, 4, 4), 1.0));
            }
        }
    }

    #[test]
    fn hand_computed_stump() {
        // Left half 10, right half 50: F = (-1*80 + 1*400) / 16 = 20.
        let img = GrayImage::from_fn(4, 4, |x, _| if x < 2 { 10 } else { 50 });
        let ii = IntegralImage::new(&img);
        let w = Rect::new(0, 0, 4, 4);
        assert_eq!(feature_response(&left_right().feature, &ii, w, 1.0), 20.0);
        // sigma = 20, so the split point is threshold * 20.
        assert_eq!(window_sigma(&ii, w), 20.0);
        let pass_if_right = |thr: f64| eval_window(&one_stage(stump(&[(Rect::new(0, 0, 2, 4), -1.0), (Rect::new(2, 0, 2, 4), 1.0)], thr, -1.0, 1.0), 0.0), &ii, w, 1.0);
        assert!(pass_if_right(0.99)); // 20 >= 19.8 -> right
        assert!(!pass_if_right(1.01)); // 20 < 20.2 -> left
    }

    #[test]
    fn uniform_image_uses_unit_sigma() {
        let img = GrayImage::filled(4, 4, 77);
        let ii = IntegralImage::new(&img);
        let w = Rect::new(0, 0, 4, 4);
        assert_eq!(window_sigma(&ii, w), 1.0);
        assert_eq!(feature_response(&left_right().feature, &ii, w, 1.0), 0.0);
        // F = 0 is not < 0 -> right branch.
        assert!(eval_window(&one_stage(left_right(), 0.5), &ii, w, 1.0));
        assert!(!eval_window(&one_stage(left_right(), 1.5), &ii, w, 1.0));
    }

    #[test]
    fn tiny_images_and_bad_factor() {
        let m = one_stage(left_right(), -1e30);
        let img = GrayImage::filled(3, 3, 0);
        let p = DetectParams { min_size: 1, ..Default::default() };
        assert!(detect_multiscale(&m, &img, &p).unwrap().is_empty());
        let bad = DetectParams { scale_factor: 1.0, ..p };
        assert!(detect_multiscale(&m, &img, &bad).is_err());
    }

    #[test]
    fn empty_sequence_rejected() {
        let img = GrayImage::filled(8, 8, 0);
        assert!(matches!(
            detect_face_sequence(&[], &img, &DetectParams::default()),
            Err(CascadeError::InvalidArgument(_))
        ));
    }

    #[test]
    fn scaled_rects_stay_inside_window() {
        for k in 0..200 {
            let s = 1.0 + k as f64 * 0.037;
            let m = one_stage(stump(&[(Rect::new(0, 0, 24, 24), -1.0), (Rect::new(7, 13, 17, 11), 3.0)], 0.0, 0.0, 0.0), 0.0);
            let m = CascadeModel { window_w: 24, window_h: 24, ..m };
            let sc = ScaledCascade::new(&m, s);
            let (ww, wh) = sc.window_size();
            for r in &sc.stages[0].stumps[0].rects[..2] {
                assert!(r.rect.fits(ww, wh), "scale {s}: {} in {ww}x{wh}", r.rect);
            }
        }
    }

    #[test]
    fn grouping_examples() {
        assert!(group_rects(&[], 3, 0.2).is_empty());
        let r = Rect::new(10, 10, 30, 30);
        assert_eq!(group_rects(&[r, r, r], 3, 0.2), vec![Detection { rect: r, neighbors: 3 }]);
        let far = [Rect::new(0, 0, 24, 24), Rect::new(100, 100, 24, 24)];
        assert!(group_rects(&far, 2, 0.2).is_empty());
        assert_eq!(group_rects(&far, 1, 0.2).len(), 2);
    }

    // Clusters by brute-force connectivity (repeated relaxation).
    fn oracle_clusters(raw: &[Rect], eps: f64) -> Vec<Vec<usize>> {
        let n = raw.len();
        let mut label: Vec<usize> = (0..n).collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in 0..n {
                    if similar(&raw[i], &raw[j], eps) && label[j] < label[i] {
                        label[i] = label[j];
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (i, l) in label.into_iter().enumerate() {
            groups.entry(l).or_default().push(i);
        }
        groups.into_values().collect()
    }

    fn rects() -> impl Strategy<Value = Vec<Rect>> {
        proptest::collection::vec((0u32..60, 0u32..60, 20u32..40), 0..25)
            .prop_map(|v| v.into_iter().map(|(x, y, s)| Rect::new(x, y, s, s)).collect())
    }

    proptest! {
        #[test]
        fn grouping_matches_oracle(raw in rects(), k in 1usize..4) {
            let got = group_rects(&raw, k, 0.2);
            let mut expected: Vec<usize> = oracle_clusters(&raw, 0.2).into_iter().map(|g| g.len()).filter(|&c| c >= k).collect();
            let mut counts: Vec<usize> = got.iter().map(|d| d.neighbors).collect();
            expected.sort_unstable();
            counts.sort_unstable();
            prop_assert_eq!(counts, expected);
        }

        #[test]
        fn grouping_is_permutation_invariant(raw in rects(), seed: u64) {
            let mut shuffled = raw.clone();
            let mut rng = crate::dataset::Rng::new(seed);
            rng.shuffle(&mut shuffled);
            prop_assert_eq!(group_rects(&raw, 2, 0.2), group_rects(&shuffled, 2, 0.2));
        }

        #[test]
        fn more_neighbors_never_more_detections(raw in rects(), k in 1usize..5) {
            prop_assert!(group_rects(&raw, k + 1, 0.2).len() <= group_rects(&raw, k, 0.2).len());
        }
    }
}
