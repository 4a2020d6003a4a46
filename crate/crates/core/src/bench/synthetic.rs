//! Deterministic document-like test images with exact ground truth.
//!
//! Glyphs are unions of axis-aligned bars laid out in text lines. An additive
//! illumination ramp and seeded uniform noise are applied on top; the ground
//! truth is the stroke layout itself.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imageio::{BinaryImage, GrayImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ramp {
    /// Brightens left to right.
    Horizontal,
    /// Brightens top to bottom.
    Vertical,
    /// Brightens from the top-left corner to the bottom-right corner.
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub stroke_value: u8,
    pub background_value: u8,
    /// Ramp amplitude added on top of both strokes and background.
    pub illumination_gradient: u8,
    pub ramp: Ramp,
    /// Uniform integer noise in `[-noise_amplitude, +noise_amplitude]`.
    pub noise_amplitude: u8,
    pub noise_seed: u64,
    /// Side of a glyph's bounding square.
    pub glyph_size: usize,
    pub stroke_width: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            width: 256,
            height: 256,
            stroke_value: 40,
            background_value: 200,
            illumination_gradient: 40,
            ramp: Ramp::Horizontal,
            noise_amplitude: 5,
            noise_seed: 0,
            glyph_size: 12,
            stroke_width: 3,
        }
    }
}

/// Glyph shapes, each a union of full-length bars inside a `g x g` box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Glyph {
    I,
    L,
    T,
    H,
    O,
    E,
}

impl Glyph {
    const ALL: [Glyph; 6] = [Glyph::I, Glyph::L, Glyph::T, Glyph::H, Glyph::O, Glyph::E];

    /// Shape used at text line `line`, position `col`.
    pub fn at(line: usize, col: usize) -> Glyph {
        Glyph::ALL[(line * 5 + col * 3 + line * col) % 6]
    }

    /// Whether box-relative `(x, y)` is inked.
    fn covers(self, x: usize, y: usize, g: usize, s: usize) -> bool {
        let mid = (g - s) / 2;
        let vbar = |x0: usize| x >= x0 && x < x0 + s;
        let hbar = |y0: usize| y >= y0 && y < y0 + s;
        match self {
            Glyph::I => vbar(mid),
            Glyph::L => vbar(0) || hbar(g - s),
            Glyph::T => hbar(0) || vbar(mid),
            Glyph::H => vbar(0) || vbar(g - s) || hbar(mid),
            Glyph::O => vbar(0) || vbar(g - s) || hbar(0) || hbar(g - s),
            Glyph::E => vbar(0) || hbar(0) || hbar(mid) || hbar(g - s),
        }
    }
}

/// Glyph placement: origins of every glyph box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub margin: usize,
    pub column_pitch: usize,
    pub line_pitch: usize,
    pub columns: usize,
    pub lines: usize,
}

impl Layout {
    pub fn for_spec(spec: &SyntheticSpec) -> Layout {
        let g = spec.glyph_size;
        let margin = g;
        let column_pitch = g + (g / 2).max(spec.stroke_width);
        let line_pitch = 2 * g;
        let fit = |len: usize, pitch: usize| {
            if len >= 2 * margin + g {
                (len - 2 * margin - g) / pitch + 1
            } else {
                0
            }
        };
        Layout {
            margin,
            column_pitch,
            line_pitch,
            columns: fit(spec.width, column_pitch),
            lines: fit(spec.height, line_pitch),
        }
    }

    pub fn glyphs(&self) -> impl Iterator<Item = (usize, usize, Glyph)> + '_ {
        (0..self.lines).flat_map(move |line| {
            (0..self.columns).map(move |col| {
                (
                    self.margin + col * self.column_pitch,
                    self.margin + line * self.line_pitch,
                    Glyph::at(line, col),
                )
            })
        })
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::param("size", format!("{}x{} is empty", self.width, self.height)));
        }
        if self.stroke_value >= self.background_value {
            return Err(Error::param(
                "stroke_value",
                format!(
                    "strokes ({}) must be darker than the background ({})",
                    self.stroke_value, self.background_value
                ),
            ));
        }
        if self.stroke_width == 0 {
            return Err(Error::param("stroke_width", "must be at least 1"));
        }
        if self.glyph_size < 3 * self.stroke_width {
            return Err(Error::param(
                "glyph_size",
                format!(
                    "{} is below three stroke widths ({})",
                    self.glyph_size,
                    3 * self.stroke_width
                ),
            ));
        }
        Ok(())
    }

    /// Ramp offset at `(x, y)`, rounded to the nearest integer.
    fn ramp_at(&self, x: usize, y: usize) -> i32 {
        let amp = self.illumination_gradient as f64;
        let frac = match self.ramp {
            Ramp::Horizontal => x as f64 / (self.width.max(2) - 1) as f64,
            Ramp::Vertical => y as f64 / (self.height.max(2) - 1) as f64,
            Ramp::Diagonal => (x + y) as f64 / (self.width + self.height - 2).max(1) as f64,
        };
        (amp * frac).round() as i32
    }
}

/// Returns the rendered image and its stroke mask as ground truth.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<(GrayImage, BinaryImage)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut ink = vec![false; w * h];
    let (g, s) = (spec.glyph_size, spec.stroke_width);
    for (gx, gy, glyph) in Layout::for_spec(spec).glyphs() {
        for dy in 0..g {
            for dx in 0..g {
                if glyph.covers(dx, dy, g, s) {
                    ink[(gy + dy) * w + gx + dx] = true;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.noise_seed);
    let noise = spec.noise_amplitude as i32;
    let mut pixels = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let base = if ink[y * w + x] {
                spec.stroke_value
            } else {
                spec.background_value
            } as i32;
            let n = if noise > 0 { rng.random_range(-noise..=noise) } else { 0 };
            pixels.push((base + spec.ramp_at(x, y) + n).clamp(0, 255) as u8);
        }
    }
    Ok((GrayImage::new(w, h, pixels)?, BinaryImage::from_mask(w, h, &ink)?))
}

/// `count` varied specs with strokes 40, background 200, ramp amplitude 40
/// and noise +-5: glyph size, stroke width, ramp direction and seed rotate.
pub fn corpus(count: usize, width: usize, height: usize) -> Vec<SyntheticSpec> {
    const RAMPS: [Ramp; 3] = [Ramp::Horizontal, Ramp::Vertical, Ramp::Diagonal];
    (0..count)
        .map(|i| SyntheticSpec {
            width,
            height,
            ramp: RAMPS[i % 3],
            noise_seed: 1000 + i as u64,
            glyph_size: 9 + (i % 4) * 2,
            stroke_width: 2 + i % 2,
            ..SyntheticSpec::default()
        })
        .collect()
}
