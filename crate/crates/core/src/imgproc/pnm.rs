//! Netpbm grayscale (P2/P5) and color (P3/P6) images with a max value of 255.

use std::fs;
use std::path::Path;

use super::{GrayImage, ImageError, RgbImage};

/// A decoded netpbm file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PnmImage {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl PnmImage {
    pub fn width(&self) -> u32 {
        match self {
            PnmImage::Gray(g) => g.width(),
            PnmImage::Rgb(c) => c.width(),
        }
    }

    pub fn height(&self) -> u32 {
        match self {
            PnmImage::Gray(g) => g.height(),
            PnmImage::Rgb(c) => c.height(),
        }
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' && self.bytes[self.pos] != b'\r' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, ImageError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::Format(format!("expected {what} at byte {start}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ImageError::Format(format!("{what} out of range at byte {start}")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<PnmImage, ImageError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(ImageError::Format("missing netpbm magic number".into()));
    }
    let magic = bytes[1];
    let channels = match magic {
        b'2' | b'5' => 1usize,
        b'3' | b'6' => 3,
        b'1' | b'4' => return Err(ImageError::Format("bitmap (P1/P4) images are not supported".into())),
        _ => return Err(ImageError::Format(format!("unknown netpbm magic P{}", magic as char))),
    };
    let mut hdr = Header { bytes, pos: 2 };
    let width = hdr.number("width")?;
    let height = hdr.number("height")?;
    let maxval = hdr.number("max value")?;
    if maxval != 255 {
        return Err(ImageError::Format(format!("max value {maxval} unsupported (only 255)")));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::Format(format!("degenerate size {width}x{height}")));
    }
    let count = width as usize * height as usize * channels;

    let data = if magic == b'5' || magic == b'6' {
        // Exactly one whitespace byte separates the header from the raster.
        let start = hdr.pos + 1;
        if hdr.pos >= bytes.len() || !bytes[hdr.pos].is_ascii_whitespace() {
            return Err(ImageError::Format("missing whitespace after header".into()));
        }
        let end = start + count;
        if bytes.len() < end {
            return Err(ImageError::Format(format!(
                "raster truncated: {} of {count} bytes",
                bytes.len().saturating_sub(start)
            )));
        }
        bytes[start..end].to_vec()
    } else {
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            let v = hdr.number("sample")?;
            if v > 255 {
                return Err(ImageError::Format(format!("sample {v} exceeds max value 255")));
            }
            data.push(v as u8);
        }
        data
    };

    if channels == 1 {
        Ok(PnmImage::Gray(GrayImage::new(width, height, data)?))
    } else {
        Ok(PnmImage::Rgb(RgbImage::new(width, height, data)?))
    }
}

pub fn read(path: impl AsRef<Path>) -> Result<PnmImage, ImageError> {
    decode(&fs::read(path)?)
}

/// Reads a PGM, or a PPM converted with `method`.
pub fn read_gray(path: impl AsRef<Path>, method: super::GrayMethod) -> Result<GrayImage, ImageError> {
    Ok(match read(path)? {
        PnmImage::Gray(g) => g,
        PnmImage::Rgb(c) => method.apply(&c),
    })
}

/// Binary PGM (P5).
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

/// Binary PPM (P6).
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

/// ASCII PGM (P2), 16 samples per line.
pub fn encode_pgm_ascii(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n255\n", img.width(), img.height());
    for line in img.data().chunks(16) {
        let row: Vec<String> = line.iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<(), ImageError> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

pub fn write_ppm(path: impl AsRef<Path>, img: &RgbImage) -> Result<(), ImageError> {
    fs::write(path, encode_ppm(img))?;
    Ok(())
}
