//! Pixel-level primitives: color to gray conversion, crop, bilinear resize
//! and integral images.

pub mod pnm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("rect {rect} is out of bounds for a {width}x{height} image")]
    Bounds { rect: Rect, width: u32, height: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed image: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Axis-aligned rectangle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    /// Non-empty and entirely inside a `width`x`height` image.
    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.w > 0
            && self.h > 0
            && self.x as u64 + self.w as u64 <= width as u64
            && self.y as u64 + self.h as u64 <= height as u64
    }

    /// Shifts the rect by the top-left corner of `origin`.
    pub fn translate(&self, origin: &Rect) -> Rect {
        Rect::new(self.x + origin.x, self.y + origin.y, self.w, self.h)
    }

    pub fn intersection_area(&self, other: &Rect) -> u64 {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 <= x0 || y1 <= y0 {
            0
        } else {
            (x1 - x0) as u64 * (y1 - y0) as u64
        }
    }

    /// Intersection over union.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}x{})", self.x, self.y, self.w, self.h)
    }
}

/// Interleaved 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImageError> {
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(ImageError::InvalidArgument(format!(
                "RGB buffer holds {} bytes, expected {expected} for {width}x{height}",
                data.len()
            )));
        }
        Ok(RgbImage { width, height, data })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        RgbImage { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    fn map_gray(&self, f: impl Fn(u32, u32, u32) -> u8) -> GrayImage {
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| f(p[0] as u32, p[1] as u32, p[2] as u32))
            .collect();
        GrayImage { width: self.width, height: self.height, data }
    }
}

/// Row-major 8-bit intensity matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImageError> {
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(ImageError::InvalidArgument(format!(
                "gray buffer holds {} bytes, expected {expected} for {width}x{height}",
                data.len()
            )));
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        GrayImage { width, height, data: vec![value; width as usize * height as usize] }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn full_rect(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    pub fn row(&self, y: u32) -> &[u8] {
        let w = self.width as usize;
        &self.data[y as usize * w..(y as usize + 1) * w]
    }
}

/// Which of the two color-to-gray formulas to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrayMethod {
    Average,
    #[default]
    Luminosity,
}

impl GrayMethod {
    pub fn apply(self, img: &RgbImage) -> GrayImage {
        match self {
            GrayMethod::Average => gray_average(img),
            GrayMethod::Luminosity => gray_luminosity(img),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GrayMethod::Average => "average",
            GrayMethod::Luminosity => "luminosity",
        }
    }
}

impl FromStr for GrayMethod {
    type Err = ImageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "average" | "avg" => Ok(GrayMethod::Average),
            "luminosity" | "weighted" => Ok(GrayMethod::Luminosity),
            other => Err(ImageError::InvalidArgument(format!(
                "unknown gray method {other:?} (expected average or luminosity)"
            ))),
        }
    }
}

/// `floor((R + G + B) / 3)` per pixel.
pub fn gray_average(img: &RgbImage) -> GrayImage {
    img.map_gray(|r, g, b| ((r + g + b) / 3) as u8)
}

/// `0.3 R + 0.59 G + 0.11 B`, rounded half up.
///
/// Evaluated in hundredths so the half-way cases round exactly.
pub fn gray_luminosity(img: &RgbImage) -> GrayImage {
    img.map_gray(|r, g, b| ((30 * r + 59 * g + 11 * b + 50) / 100) as u8)
}

pub fn crop(img: &GrayImage, r: Rect) -> Result<GrayImage, ImageError> {
    if !r.fits(img.width, img.height) {
        return Err(ImageError::Bounds { rect: r, width: img.width, height: img.height });
    }
    let mut data = Vec::with_capacity(r.area() as usize);
    for y in r.y..r.bottom() {
        let row = img.row(y);
        data.extend_from_slice(&row[r.x as usize..r.right() as usize]);
    }
    Ok(GrayImage { width: r.w, height: r.h, data })
}

/// Bilinear resampling with pixel-center alignment and clamp-to-border.
pub fn resize_bilinear(img: &GrayImage, out_w: u32, out_h: u32) -> Result<GrayImage, ImageError> {
    if out_w == 0 || out_h == 0 {
        return Err(ImageError::InvalidArgument(format!(
            "target size {out_w}x{out_h} must be at least 1x1"
        )));
    }
    if img.width == 0 || img.height == 0 {
        return Err(ImageError::InvalidArgument("source image is empty".into()));
    }
    if out_w == img.width && out_h == img.height {
        return Ok(img.clone());
    }

    // (i0, i1, frac) per destination column/row.
    fn taps(src: u32, dst: u32) -> Vec<(usize, usize, f64)> {
        let scale = src as f64 / dst as f64;
        let max = (src - 1) as f64;
        (0..dst)
            .map(|d| {
                let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
                let i0 = s.floor();
                let i1 = (i0 + 1.0).min(max);
                (i0 as usize, i1 as usize, s - i0)
            })
            .collect()
    }

    let xs = taps(img.width, out_w);
    let ys = taps(img.height, out_h);
    let w = img.width as usize;
    let mut data = Vec::with_capacity(out_w as usize * out_h as usize);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let p = |x: usize, y: usize| img.data[y * w + x] as f64;
            let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
            let bot = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
            let v = top * (1.0 - fy) + bot * fy;
            data.push((v + 0.5).floor().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(GrayImage { width: out_w, height: out_h, data })
}

/// Zero-padded cumulative sums of intensities and squared intensities.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    width: u32,
    height: u32,
    stride: usize,
    sums: Vec<u64>,
    squared_sums: Vec<u64>,
}

impl IntegralImage {
    pub fn new(img: &GrayImage) -> Self {
        let stride = img.width as usize + 1;
        let rows = img.height as usize + 1;
        let mut sums = vec![0u64; stride * rows];
        let mut squared_sums = vec![0u64; stride * rows];
        for y in 0..img.height as usize {
            let mut row_sum = 0u64;
            let mut row_sq = 0u64;
            for (x, &v) in img.row(y as u32).iter().enumerate() {
                let v = v as u64;
                row_sum += v;
                row_sq += v * v;
                let i = (y + 1) * stride + x + 1;
                sums[i] = sums[i - stride] + row_sum;
                squared_sums[i] = squared_sums[i - stride] + row_sq;
            }
        }
        IntegralImage { width: img.width, height: img.height, stride, sums, squared_sums }
    }

    /// Width of the source image (the table itself is one wider).
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Cumulative sum of all pixels above and left of `(x, y)`, exclusive.
    pub fn sum_at(&self, x: u32, y: u32) -> u64 {
        self.sums[y as usize * self.stride + x as usize]
    }

    pub fn squared_sum_at(&self, x: u32, y: u32) -> u64 {
        self.squared_sums[y as usize * self.stride + x as usize]
    }

    #[inline]
    fn corners(table: &[u64], stride: usize, x: usize, y: usize, w: usize, h: usize) -> u64 {
        let top = y * stride;
        let bot = (y + h) * stride;
        table[bot + x + w] + table[top + x] - table[top + x + w] - table[bot + x]
    }

    /// Sum of intensities inside `r`. `r` must fit the source image.
    #[inline]
    pub fn rect_sum(&self, r: Rect) -> u64 {
        debug_assert!(r.x + r.w <= self.width && r.y + r.h <= self.height);
        Self::corners(&self.sums, self.stride, r.x as usize, r.y as usize, r.w as usize, r.h as usize)
    }

    #[inline]
    pub fn rect_squared_sum(&self, r: Rect) -> u64 {
        debug_assert!(r.x + r.w <= self.width && r.y + r.h <= self.height);
        Self::corners(
            &self.squared_sums,
            self.stride,
            r.x as usize,
            r.y as usize,
            r.w as usize,
            r.h as usize,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rgb1(p: [u8; 3]) -> RgbImage {
        RgbImage::new(1, 1, p.to_vec()).unwrap()
    }

    #[test]
    fn average_of_table_pixel() {
        assert_eq!(gray_average(&rgb1([134, 21, 107])).data(), &[87]);
        assert_eq!(gray_average(&rgb1([0, 0, 0])).data(), &[0]);
    }

    #[test]
    fn luminosity_rounding() {
        assert_eq!(gray_luminosity(&rgb1([134, 21, 107])).data(), &[64]);
        assert_eq!(gray_luminosity(&rgb1([255, 0, 0])).data(), &[77]);
    }

    #[test]
    fn gray_identity_on_neutral_pixels() {
        for v in 0..=255u8 {
            let img = rgb1([v, v, v]);
            assert_eq!(gray_average(&img).data(), &[v]);
            assert_eq!(gray_luminosity(&img).data(), &[v]);
        }
    }

    #[test]
    fn buffer_length_is_checked() {
        assert!(RgbImage::new(2, 2, vec![0; 11]).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
    }

    fn ramp4() -> GrayImage {
        GrayImage::from_fn(4, 4, |x, y| (y * 4 + x) as u8)
    }

    #[test]
    fn crop_cases() {
        let img = ramp4();
        assert_eq!(crop(&img, img.full_rect()).unwrap(), img);
        let c = crop(&img, Rect::new(1, 1, 2, 2)).unwrap();
        assert_eq!(c.data(), &[5, 6, 9, 10]);
        let err = crop(&img, Rect::new(3, 3, 2, 2)).unwrap_err();
        assert!(err.to_string().contains("(3, 3, 2x2)"), "{err}");
        assert!(crop(&img, Rect::new(0, 0, 0, 2)).is_err());
    }

    #[test]
    fn resize_cases() {
        let img = ramp4();
        assert_eq!(resize_bilinear(&img, 4, 4).unwrap(), img);

        let flat = GrayImage::filled(7, 5, 200);
        let r = resize_bilinear(&flat, 13, 3).unwrap();
        assert!(r.data().iter().all(|&v| v == 200));

        // Centers map to -0.25, 0.25, 0.75, 1.25 in source coordinates.
        let two = GrayImage::new(2, 1, vec![0, 100]).unwrap();
        assert_eq!(resize_bilinear(&two, 4, 1).unwrap().data(), &[0, 25, 75, 100]);

        assert!(resize_bilinear(&img, 0, 3).is_err());
    }

    #[test]
    fn integral_trivial_cases() {
        let one = GrayImage::new(1, 1, vec![5]).unwrap();
        assert_eq!(IntegralImage::new(&one).rect_sum(one.full_rect()), 5);
        assert_eq!(IntegralImage::new(&one).rect_squared_sum(one.full_rect()), 25);

        let zero = GrayImage::filled(6, 3, 0);
        let ii = IntegralImage::new(&zero);
        for y in 0..=3 {
            for x in 0..=6 {
                assert_eq!(ii.sum_at(x, y), 0);
            }
        }
    }

    #[test]
    fn integral_handles_largest_supported_image() {
        let img = GrayImage::filled(4096, 4096, 255);
        let ii = IntegralImage::new(&img);
        assert_eq!(ii.rect_sum(img.full_rect()), 4096 * 4096 * 255);
        assert_eq!(ii.rect_squared_sum(img.full_rect()), 4096 * 4096 * 255 * 255);
    }

    fn naive_sum(img: &GrayImage, r: Rect) -> (u64, u64) {
        let mut s = 0;
        let mut sq = 0;
        for y in r.y..r.bottom() {
            for x in r.x..r.right() {
                let v = img.get(x, y) as u64;
                s += v;
                sq += v * v;
            }
        }
        (s, sq)
    }

    fn image_and_rect() -> impl Strategy<Value = (GrayImage, Rect)> {
        (1u32..24, 1u32..24).prop_flat_map(|(w, h)| {
            (
                proptest::collection::vec(any::<u8>(), (w * h) as usize),
                0..w,
                0..h,
            )
                .prop_flat_map(move |(data, x, y)| {
                    let img = GrayImage::new(w, h, data).unwrap();
                    (Just(img), 1..=w - x, 1..=h - y)
                        .prop_map(move |(img, rw, rh)| (img, Rect::new(x, y, rw, rh)))
                })
        })
    }

    proptest! {
        #[test]
        fn rect_sum_matches_naive((img, r) in image_and_rect()) {
            let ii = IntegralImage::new(&img);
            prop_assert_eq!((ii.rect_sum(r), ii.rect_squared_sum(r)), naive_sum(&img, r));
        }

        #[test]
        fn integral_is_monotone((img, _r) in image_and_rect()) {
            let ii = IntegralImage::new(&img);
            for y in 0..=img.height() {
                prop_assert_eq!(ii.sum_at(0, y), 0);
                for x in 1..=img.width() {
                    prop_assert!(ii.sum_at(x, y) >= ii.sum_at(x - 1, y));
                    if y > 0 {
                        prop_assert!(ii.sum_at(x, y) >= ii.sum_at(x, y - 1));
                    }
                }
            }
        }

        #[test]
        fn crop_composes((img, a) in image_and_rect(), fx in 0.0..1.0f64, fy in 0.0..1.0f64, fw in 0.0..1.0f64, fh in 0.0..1.0f64) {
            let bx = (fx * a.w as f64) as u32;
            let by = (fy * a.h as f64) as u32;
            let bw = 1 + (fw * (a.w - bx) as f64) as u32;
            let bh = 1 + (fh * (a.h - by) as f64) as u32;
            let b = Rect::new(bx, by, bw.min(a.w - bx), bh.min(a.h - by));
            let twice = crop(&crop(&img, a).unwrap(), b).unwrap();
            prop_assert_eq!(twice, crop(&img, b.translate(&a)).unwrap());
        }

        #[test]
        fn luminosity_within_half_of_exact(r: u8, g: u8, b: u8) {
            let exact = 0.3 * r as f64 + 0.59 * g as f64 + 0.11 * b as f64;
            let got = gray_luminosity(&rgb1([r, g, b])).data()[0] as f64;
            prop_assert!((got - exact).abs() <= 0.5 + 1e-9);
        }
    }
}
