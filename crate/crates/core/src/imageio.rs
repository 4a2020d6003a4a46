//! Gray, color and bi-level rasters plus a minimal PNM (PGM/PPM) codec.
//!
//! Only maxval 255 is supported. Gray images decode from `P2`/`P5`, color
//! images from `P3`/`P6`; encoding always produces binary `P5`.

use crate::error::{Error, ParseError, Result};

/// Row-major access shared by every raster type.
pub trait Raster {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn pixels(&self) -> &[u8];
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_len(width, height, pixels.len())?;
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        GrayImage {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage {
            width,
            height,
            pixels,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn to_pnm(&self) -> Vec<u8> {
        write_pnm(self)
    }
}

impl Raster for GrayImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn pixels(&self) -> &[u8] {
        &self.pixels
    }
}

/// A bi-level image: every pixel is 0 (foreground/ink) or 255 (background).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryImage(GrayImage);

impl BinaryImage {
    pub const FOREGROUND: u8 = 0;
    pub const BACKGROUND: u8 = 255;

    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        Self::try_from(GrayImage::new(width, height, pixels)?)
    }

    /// Builds from per-pixel foreground flags.
    pub fn from_mask(width: usize, height: usize, foreground: &[bool]) -> Result<Self> {
        check_len(width, height, foreground.len())?;
        let pixels = foreground
            .iter()
            .map(|&f| if f { Self::FOREGROUND } else { Self::BACKGROUND })
            .collect();
        Ok(BinaryImage(GrayImage {
            width,
            height,
            pixels,
        }))
    }

    /// Callers guarantee every value is 0 or 255.
    pub(crate) fn from_raw(width: usize, height: usize, pixels: Vec<u8>) -> Self {
        debug_assert!(pixels.iter().all(|&v| v == 0 || v == 255));
        BinaryImage(GrayImage {
            width,
            height,
            pixels,
        })
    }

    #[inline]
    pub fn is_foreground(&self, x: usize, y: usize) -> bool {
        self.0.get(x, y) == Self::FOREGROUND
    }

    pub fn foreground_count(&self) -> usize {
        self.0.pixels.iter().filter(|&&v| v == Self::FOREGROUND).count()
    }

    pub fn as_gray(&self) -> &GrayImage {
        &self.0
    }

    pub fn to_pnm(&self) -> Vec<u8> {
        write_pnm(self)
    }
}

impl TryFrom<GrayImage> for BinaryImage {
    type Error = Error;

    fn try_from(img: GrayImage) -> Result<Self> {
        if let Some(pos) = img.pixels.iter().position(|&v| v != 0 && v != 255) {
            return Err(Error::param(
                "pixels",
                format!(
                    "bi-level image has value {} at index {pos}",
                    img.pixels[pos]
                ),
            ));
        }
        Ok(BinaryImage(img))
    }
}

impl Raster for BinaryImage {
    fn width(&self) -> usize {
        self.0.width
    }
    fn height(&self) -> usize {
        self.0.height
    }
    fn pixels(&self) -> &[u8] {
        &self.0.pixels
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_len(width, height, pixels.len())?;
        Ok(ColorImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }
}

fn check_len(width: usize, height: usize, len: usize) -> Result<()> {
    match width.checked_mul(height) {
        Some(n) if n == len => Ok(()),
        _ => Err(Error::param(
            "pixels",
            format!("expected {width}x{height} samples, got {len}"),
        )),
    }
}

/// Luma of one RGB triple, `0.299 r + 0.587 g + 0.114 b` rounded half-up.
///
/// Evaluated in integer thousandths so halves round exactly.
#[inline]
pub fn luma([r, g, b]: [u8; 3]) -> u8 {
    let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((weighted + 500) / 1000) as u8
}

pub fn to_gray(img: &ColorImage) -> GrayImage {
    GrayImage {
        width: img.width,
        height: img.height,
        pixels: img.pixels.iter().copied().map(luma).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PnmImage {
    Gray(GrayImage),
    Color(ColorImage),
}

impl PnmImage {
    /// Gray images pass through, color images are converted with [`to_gray`].
    pub fn into_gray(self) -> GrayImage {
        match self {
            PnmImage::Gray(g) => g,
            PnmImage::Color(c) => to_gray(&c),
        }
    }
}

/// Encodes as binary `P5` with maxval 255.
pub fn write_pnm<R: Raster + ?Sized>(img: &R) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.pixels());
    out
}

pub fn read_pnm(bytes: &[u8]) -> Result<PnmImage, ParseError> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(ParseError::BadMagic { offset: 0 });
    }
    let (ascii, channels) = match bytes[1] {
        b'2' => (true, 1),
        b'3' => (true, 3),
        b'5' => (false, 1),
        b'6' => (false, 3),
        _ => return Err(ParseError::BadMagic { offset: 1 }),
    };
    cur.pos = 2;
    if !cur.peek().is_some_and(is_pnm_space) {
        return Err(ParseError::MalformedHeader {
            offset: cur.pos,
            reason: "expected whitespace after magic number".into(),
        });
    }

    let width = cur.header_number("width")?;
    let height = cur.header_number("height")?;
    cur.skip_space_and_comments();
    let maxval_offset = cur.pos;
    let maxval = cur.header_number("maxval")?;
    if maxval != 255 {
        return Err(ParseError::UnsupportedMaxval {
            offset: maxval_offset,
            maxval,
        });
    }
    if width == 0 || height == 0 {
        return Err(ParseError::MalformedHeader {
            offset: cur.pos,
            reason: format!("zero dimension {width}x{height}"),
        });
    }
    let samples = (width as usize)
        .checked_mul(height as usize)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| ParseError::MalformedHeader {
            offset: cur.pos,
            reason: format!("dimensions {width}x{height} overflow"),
        })?;

    let data = if ascii {
        cur.ascii_samples(samples)?
    } else {
        // Exactly one whitespace byte separates the header from the payload.
        match cur.peek() {
            Some(b) if is_pnm_space(b) => cur.pos += 1,
            _ => {
                return Err(ParseError::MalformedHeader {
                    offset: cur.pos,
                    reason: "expected single whitespace before payload".into(),
                })
            }
        }
        let payload = &bytes[cur.pos..];
        if payload.len() < samples {
            return Err(ParseError::TruncatedPayload {
                offset: bytes.len(),
                expected: samples,
                found: payload.len(),
            });
        }
        payload[..samples].to_vec()
    };

    let (width, height) = (width as usize, height as usize);
    Ok(if channels == 1 {
        PnmImage::Gray(GrayImage {
            width,
            height,
            pixels: data,
        })
    } else {
        PnmImage::Color(ColorImage {
            width,
            height,
            pixels: data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        })
    })
}

fn is_pnm_space(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    /// Skips whitespace and `#` comments running to end of line.
    fn skip_space_and_comments(&mut self) {
        while let Some(b) = self.peek() {
            if is_pnm_space(b) {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Reads a run of decimal digits; `None` if none are present.
    fn digits(&mut self) -> Option<Result<u64, usize>> {
        let start = self.pos;
        let mut value: u64 = 0;
        let mut overflow = false;
        while let Some(b) = self.peek().filter(u8::is_ascii_digit) {
            match value
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as u64))
            {
                Some(v) => value = v,
                None => overflow = true,
            }
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else if overflow {
            Some(Err(start))
        } else {
            Some(Ok(value))
        }
    }

    fn header_number(&mut self, what: &str) -> Result<u64, ParseError> {
        self.skip_space_and_comments();
        let offset = self.pos;
        let malformed = |reason: String| ParseError::MalformedHeader { offset, reason };
        let value = match self.digits() {
            Some(Ok(v)) => v,
            Some(Err(_)) => return Err(malformed(format!("{what} does not fit in 64 bits"))),
            None if self.peek().is_none() => {
                return Err(malformed(format!("unexpected end of input before {what}")))
            }
            None => return Err(malformed(format!("expected {what}"))),
        };
        if self.peek().is_some_and(|b| !is_pnm_space(b) && b != b'#') {
            return Err(ParseError::MalformedHeader {
                offset: self.pos,
                reason: format!("unexpected byte after {what}"),
            });
        }
        Ok(value)
    }

    fn ascii_samples(&mut self, expected: usize) -> Result<Vec<u8>, ParseError> {
        let mut out = Vec::with_capacity(expected);
        while out.len() < expected {
            self.skip_space_and_comments();
            let offset = self.pos;
            match self.digits() {
                Some(Ok(v)) if v <= 255 => out.push(v as u8),
                Some(_) => {
                    return Err(ParseError::BadSample {
                        offset,
                        reason: "sample exceeds maxval 255".into(),
                    })
                }
                None if self.peek().is_none() => {
                    return Err(ParseError::TruncatedPayload {
                        offset,
                        expected,
                        found: out.len(),
                    })
                }
                None => {
                    return Err(ParseError::BadSample {
                        offset,
                        reason: "expected decimal sample".into(),
                    })
                }
            }
        }
        Ok(out)
    }
}
