//! Global (Otsu) and locally adaptive (Niblack, Sauvola) binarization.
//!
//! A pixel becomes foreground (0) when its intensity is strictly below its
//! threshold, background (255) otherwise.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imageio::{BinaryImage, GrayImage, Raster};
use crate::masks::{Structure, WindowSize};
use crate::rows::{for_each_row, Execution};
pub use crate::stats::Engine;
use crate::stats::{StatsSource, WindowStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Otsu,
    Niblack,
    Sauvola,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Otsu => "otsu",
            Method::Niblack => "niblack",
            Method::Sauvola => "sauvola",
        }
    }

    pub fn is_adaptive(self) -> bool {
        self != Method::Otsu
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "otsu" => Ok(Method::Otsu),
            "niblack" => Ok(Method::Niblack),
            "sauvola" => Ok(Method::Sauvola),
            other => Err(Error::param(
                "method",
                format!("unknown method `{other}` (expected otsu, niblack or sauvola)"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinarizationParams {
    pub method: Method,
    pub engine: Engine,
    /// Sampling structure, used by [`Engine::Sampled`] only.
    pub mask: Structure,
    /// Odd window side `W >= 3`.
    pub window: usize,
    pub k_sauvola: f64,
    /// Dynamic range of the standard deviation for the naive and integral
    /// engines.
    pub r: f64,
    /// Dynamic range of the sampled standard deviation.
    pub r_sampled: f64,
    pub k_niblack: f64,
}

impl Default for BinarizationParams {
    fn default() -> Self {
        BinarizationParams {
            method: Method::Sauvola,
            engine: Engine::Sampled,
            mask: Structure::Gs3,
            window: 21,
            k_sauvola: 0.34,
            r: 128.0,
            r_sampled: 128.0,
            k_niblack: -0.2,
        }
    }
}

impl BinarizationParams {
    pub fn validate(&self) -> Result<WindowSize> {
        let window = WindowSize::new(self.window).map_err(|_| {
            Error::param("window", format!("{} is not an odd integer >= 3", self.window))
        })?;
        if !(self.k_sauvola.is_finite() && self.k_sauvola > 0.0) {
            return Err(Error::param("k_sauvola", format!("{} is not a positive number", self.k_sauvola)));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(Error::param("r", format!("{} is not a positive number", self.r)));
        }
        if !(self.r_sampled.is_finite() && self.r_sampled > 0.0) {
            return Err(Error::param("r_sampled", format!("{} is not a positive number", self.r_sampled)));
        }
        if !self.k_niblack.is_finite() {
            return Err(Error::param("k_niblack", format!("{} is not finite", self.k_niblack)));
        }
        Ok(window)
    }

    /// The dynamic range that applies to the selected engine.
    pub fn dynamic_range(&self) -> f64 {
        match self.engine {
            Engine::Sampled => self.r_sampled,
            _ => self.r,
        }
    }

    /// Sets the `k` of the selected method.
    pub fn with_k(mut self, k: f64) -> Self {
        match self.method {
            Method::Niblack => self.k_niblack = k,
            _ => self.k_sauvola = k,
        }
        self
    }

    pub(crate) fn rule(&self) -> Rule {
        match self.method {
            Method::Niblack => Rule::Niblack { k: self.k_niblack },
            _ => Rule::Sauvola {
                k: self.k_sauvola,
                r: self.dynamic_range(),
            },
        }
    }
}

/// Per-pixel thresholds, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ThresholdMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Thresholds rounded and clamped into `[0, 255]`, for viewing.
    pub fn to_gray(&self) -> GrayImage {
        let px = self
            .values
            .iter()
            .map(|&t| t.round().clamp(0.0, 255.0) as u8)
            .collect();
        GrayImage::new(self.width, self.height, px).expect("dimensions match")
    }
}

pub fn sauvola_threshold_at(stats: &WindowStats, k: f64, r: f64) -> f64 {
    stats.mean * (1.0 + k * (stats.std / r - 1.0))
}

pub fn niblack_threshold_at(stats: &WindowStats, k: f64) -> f64 {
    stats.mean + k * stats.std
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Rule {
    Sauvola { k: f64, r: f64 },
    Niblack { k: f64 },
}

impl Rule {
    #[inline]
    pub(crate) fn threshold(self, stats: &WindowStats) -> f64 {
        match self {
            Rule::Sauvola { k, r } => sauvola_threshold_at(stats, k, r),
            Rule::Niblack { k } => niblack_threshold_at(stats, k),
        }
    }
}

#[inline]
fn level(value: u8, threshold: f64) -> u8 {
    if (value as f64) < threshold {
        BinaryImage::FOREGROUND
    } else {
        BinaryImage::BACKGROUND
    }
}

/// Otsu's global threshold: the `T` maximising between-class variance of the
/// split `{f < T}` / `{f >= T}`, smallest `T` on ties. A single-level image
/// returns that level.
pub fn otsu_threshold(img: &GrayImage) -> u8 {
    let mut hist = [0u64; 256];
    for &v in img.pixels() {
        hist[v as usize] += 1;
    }
    let total: u64 = hist.iter().sum();
    let total_sum: u64 = hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();

    let mut best_t = 0u8;
    let mut best = 0.0f64;
    let (mut n0, mut s0) = (0u64, 0u64);
    for t in 1..=255usize {
        n0 += hist[t - 1];
        s0 += (t as u64 - 1) * hist[t - 1];
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s1 = total_sum - s0;
        // n0 * n1 * (mu0 - mu1)^2, up to the constant 1/total^2
        let diff = s0 as i128 * n1 as i128 - s1 as i128 * n0 as i128;
        let between = (diff as f64) * (diff as f64) / (n0 as f64 * n1 as f64);
        if between > best {
            best = between;
            best_t = t as u8;
        }
    }
    if best == 0.0 {
        // one populated level
        return hist.iter().position(|&c| c > 0).unwrap_or(0) as u8;
    }
    best_t
}

/// Fixed-threshold binarization. `threshold` ranges over `0..=255`.
pub fn apply_global(img: &GrayImage, threshold: u32) -> Result<BinaryImage> {
    if threshold > 255 {
        return Err(Error::param("threshold", format!("{threshold} is outside 0..=255")));
    }
    let t = threshold as f64;
    let px = img.pixels().iter().map(|&v| level(v, t)).collect();
    Ok(BinaryImage::from_raw(img.width(), img.height(), px))
}

/// Binarizes with the default execution mode and returns the thresholds used.
pub fn binarize(img: &GrayImage, params: &BinarizationParams) -> Result<(BinaryImage, ThresholdMap)> {
    binarize_with(img, params, Execution::default())
}

pub fn binarize_with(
    img: &GrayImage,
    params: &BinarizationParams,
    exec: Execution,
) -> Result<(BinaryImage, ThresholdMap)> {
    let window = params.validate()?;
    let (w, h) = (img.width(), img.height());
    let values = if params.method.is_adaptive() {
        let src = StatsSource::new(img, params.engine, window, params.mask)?;
        let rule = params.rule();
        let mut values = vec![0.0f64; img.len()];
        for_each_row(&mut values, w, exec, |y, row| {
            src.for_row(y, |x, s| row[x] = rule.threshold(&s));
        });
        values
    } else {
        vec![otsu_threshold(img) as f64; img.len()]
    };
    let px = img
        .pixels()
        .iter()
        .zip(&values)
        .map(|(&v, &t)| level(v, t))
        .collect();
    Ok((
        BinaryImage::from_raw(w, h, px),
        ThresholdMap {
            width: w,
            height: h,
            values,
        },
    ))
}

/// Binarizes without materialising the threshold map; thresholds are
/// consumed as they are produced. This is the path the timing harness uses.
pub fn binarize_image(img: &GrayImage, params: &BinarizationParams, exec: Execution) -> Result<BinaryImage> {
    let window = params.validate()?;
    let (w, h) = (img.width(), img.height());
    if !params.method.is_adaptive() {
        return apply_global(img, otsu_threshold(img) as u32);
    }
    let src = StatsSource::new(img, params.engine, window, params.mask)?;
    let rule = params.rule();
    let mut out = vec![0u8; img.len()];
    for_each_row(&mut out, w, exec, |y, row| {
        let input = img.row(y);
        src.for_row(y, |x, s| row[x] = level(input[x], rule.threshold(&s)));
    });
    Ok(BinaryImage::from_raw(w, h, out))
}

/// Binarizes from precomputed window statistics.
pub(crate) fn binarize_from_stats(img: &GrayImage, stats: &[WindowStats], rule: Rule) -> BinaryImage {
    let px = img
        .pixels()
        .iter()
        .zip(stats)
        .map(|(&v, s)| level(v, rule.threshold(s)))
        .collect();
    BinaryImage::from_raw(img.width(), img.height(), px)
}
