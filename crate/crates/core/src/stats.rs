//! Windowed mean and standard deviation.
//!
//! Three engines compute the same quantity over a window clipped to the image
//! bounds:
//!
//! * naive: visits all `W^2` window pixels;
//! * integral: four lookups in summed-area tables of intensities and squared
//!   intensities;
//! * sampled: visits only the offsets of a [`SamplingMask`].
//!
//! All three reduce to the exact pair `(sum, sum of squares)` before a single
//! shared conversion, so the naive and integral engines agree bit for bit and
//! the sampled engine with a full mask matches them too.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imageio::{GrayImage, Raster};
use crate::masks::{make_mask, SamplingMask, Structure, WindowSize};
use crate::rows::{for_each_row, Execution};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WindowStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Pixels actually used after clipping to the image.
    pub count: u32,
}

impl WindowStats {
    /// Moments must be exact integers held in `f64`.
    #[inline]
    pub(crate) fn from_moments(sum: f64, sqsum: f64, count: u32) -> Self {
        let n = count as f64;
        // n * sqsum - sum^2 is an exact integer below 2^53 for any window
        // under ~600x600, so the variance has no cancellation error.
        let var = ((n * sqsum - sum * sum) / (n * n)).max(0.0);
        WindowStats {
            mean: sum / n,
            std: var.sqrt(),
            count,
        }
    }
}

fn check_coords(img_w: usize, img_h: usize, x: usize, y: usize) -> Result<()> {
    if x < img_w && y < img_h {
        Ok(())
    } else {
        Err(Error::OutOfBounds {
            x,
            y,
            width: img_w,
            height: img_h,
        })
    }
}

/// Inclusive window extent along one axis, clipped to `[0, len)`.
#[inline]
fn clip(center: usize, half: usize, len: usize) -> (usize, usize) {
    (center.saturating_sub(half), (center + half).min(len - 1))
}

pub fn window_stats_naive(img: &GrayImage, x: usize, y: usize, window: WindowSize) -> Result<WindowStats> {
    check_coords(img.width(), img.height(), x, y)?;
    Ok(naive_at(img, x, y, window.half()))
}

#[inline]
fn naive_at(img: &GrayImage, x: usize, y: usize, half: usize) -> WindowStats {
    let w = img.width();
    let px = img.pixels();
    let (x0, x1) = clip(x, half, w);
    let (y0, y1) = clip(y, half, img.height());
    let mut sum = 0.0f64;
    let mut sqsum = 0.0f64;
    for yy in y0..=y1 {
        for &v in &px[yy * w + x0..=yy * w + x1] {
            let v = v as f64;
            sum += v;
            sqsum += v * v;
        }
    }
    let count = ((x1 - x0 + 1) * (y1 - y0 + 1)) as u32;
    WindowStats::from_moments(sum, sqsum, count)
}

/// Zero-padded summed-area tables of intensities and squared intensities.
///
/// Both tables are `(height + 1) x (width + 1)`, row-major. The intensity
/// table uses 32-bit cells with wrapping arithmetic: rectangle sums recovered
/// by inclusion-exclusion are exact as long as the rectangle itself sums below
/// `2^32`, which holds for any window, even when the running total of a very
/// large image wraps.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegralPair {
    width: usize,
    height: usize,
    sum: Vec<u32>,
    sqsum: Vec<u64>,
}

impl fmt::Debug for IntegralPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegralPair")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl IntegralPair {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Sum of intensities in the top-left `rows x cols` rectangle.
    pub fn sum_at(&self, rows: usize, cols: usize) -> u32 {
        self.sum[rows * (self.width + 1) + cols]
    }

    /// Sum of squared intensities in the top-left `rows x cols` rectangle.
    pub fn sqsum_at(&self, rows: usize, cols: usize) -> u64 {
        self.sqsum[rows * (self.width + 1) + cols]
    }

    /// Bytes held by the two tables.
    pub fn table_bytes(&self) -> usize {
        self.sum.len() * std::mem::size_of::<u32>() + self.sqsum.len() * std::mem::size_of::<u64>()
    }

    #[inline]
    fn at(&self, x: usize, y: usize, half: usize) -> WindowStats {
        let stride = self.width + 1;
        let (x0, x1) = clip(x, half, self.width);
        let (y0, y1) = clip(y, half, self.height);
        let (top, bottom) = (y0 * stride, (y1 + 1) * stride);
        let (left, right) = (x0, x1 + 1);
        let sum = self.sum[bottom + right]
            .wrapping_sub(self.sum[top + right])
            .wrapping_sub(self.sum[bottom + left])
            .wrapping_add(self.sum[top + left]);
        let sqsum = (self.sqsum[bottom + right] + self.sqsum[top + left])
            - (self.sqsum[top + right] + self.sqsum[bottom + left]);
        let count = ((x1 - x0 + 1) * (y1 - y0 + 1)) as u32;
        WindowStats::from_moments(sum as f64, sqsum as f64, count)
    }
}

pub fn build_integral(img: &GrayImage) -> IntegralPair {
    let (w, h) = (img.width(), img.height());
    let stride = w + 1;
    let mut sum = vec![0u32; stride * (h + 1)];
    let mut sqsum = vec![0u64; stride * (h + 1)];
    for y in 0..h {
        let mut row_sum = 0u32;
        let mut row_sq = 0u64;
        let (above, below) = ((y) * stride, (y + 1) * stride);
        for (x, &v) in img.row(y).iter().enumerate() {
            row_sum = row_sum.wrapping_add(v as u32);
            row_sq += (v as u64) * (v as u64);
            sum[below + x + 1] = sum[above + x + 1].wrapping_add(row_sum);
            sqsum[below + x + 1] = sqsum[above + x + 1] + row_sq;
        }
    }
    IntegralPair {
        width: w,
        height: h,
        sum,
        sqsum,
    }
}

pub fn window_stats_integral(ip: &IntegralPair, x: usize, y: usize, window: WindowSize) -> Result<WindowStats> {
    check_coords(ip.width, ip.height, x, y)?;
    Ok(ip.at(x, y, window.half()))
}

pub fn window_stats_sampled(img: &GrayImage, mask: &SamplingMask, x: usize, y: usize) -> Result<WindowStats> {
    check_coords(img.width(), img.height(), x, y)?;
    Ok(sampled_clipped(img, mask.offsets(), x, y))
}

#[inline]
fn sampled_clipped(img: &GrayImage, offsets: &[(i32, i32)], x: usize, y: usize) -> WindowStats {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let px = img.pixels();
    let mut sum = 0.0f64;
    let mut sqsum = 0.0f64;
    let mut count = 0u32;
    for &(dx, dy) in offsets {
        let sx = x as i64 + dx as i64;
        let sy = y as i64 + dy as i64;
        if sx >= 0 && sx < w && sy >= 0 && sy < h {
            let v = px[(sy * w + sx) as usize] as f64;
            sum += v;
            sqsum += v * v;
            count += 1;
        }
    }
    WindowStats::from_moments(sum, sqsum, count)
}

/// Which statistics engine feeds the adaptive thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    Naive,
    Integral,
    Sampled,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Naive, Engine::Integral, Engine::Sampled];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Naive => "naive",
            Engine::Integral => "integral",
            Engine::Sampled => "sampled",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(Engine::Naive),
            "integral" => Ok(Engine::Integral),
            "sampled" => Ok(Engine::Sampled),
            other => Err(Error::param(
                "engine",
                format!("unknown engine `{other}` (expected naive, integral or sampled)"),
            )),
        }
    }
}

/// An engine bound to one image and window, ready to answer whole rows.
///
/// Construction does the per-image setup: the integral engine builds its
/// tables here, the sampled engine builds its mask and linearised offsets.
pub struct StatsSource<'a> {
    img: &'a GrayImage,
    half: usize,
    kind: SourceKind,
}

enum SourceKind {
    Naive,
    Integral(IntegralPair),
    Sampled {
        mask: SamplingMask,
        /// `dy * width + dx` for each mask offset.
        linear: Vec<isize>,
    },
}

impl<'a> StatsSource<'a> {
    /// `structure` is only consulted by the sampled engine.
    pub fn new(img: &'a GrayImage, engine: Engine, window: WindowSize, structure: Structure) -> Result<Self> {
        let kind = match engine {
            Engine::Naive => SourceKind::Naive,
            Engine::Integral => SourceKind::Integral(build_integral(img)),
            Engine::Sampled => {
                let mask = make_mask(structure, window.get())?;
                let stride = img.width() as isize;
                let linear = mask
                    .offsets()
                    .iter()
                    .map(|&(dx, dy)| dy as isize * stride + dx as isize)
                    .collect();
                SourceKind::Sampled { mask, linear }
            }
        };
        Ok(StatsSource {
            img,
            half: window.half(),
            kind,
        })
    }

    /// Auxiliary bytes held beyond the input image.
    pub fn aux_bytes(&self) -> usize {
        match &self.kind {
            SourceKind::Integral(ip) => ip.table_bytes(),
            _ => 0,
        }
    }

    pub fn at(&self, x: usize, y: usize) -> Result<WindowStats> {
        check_coords(self.img.width(), self.img.height(), x, y)?;
        Ok(match &self.kind {
            SourceKind::Naive => naive_at(self.img, x, y, self.half),
            SourceKind::Integral(ip) => ip.at(x, y, self.half),
            SourceKind::Sampled { mask, .. } => sampled_clipped(self.img, mask.offsets(), x, y),
        })
    }

    /// Calls `sink(x, stats)` for every pixel of row `y`, left to right.
    #[inline]
    pub(crate) fn for_row(&self, y: usize, mut sink: impl FnMut(usize, WindowStats)) {
        let (w, h) = (self.img.width(), self.img.height());
        match &self.kind {
            SourceKind::Naive => {
                for x in 0..w {
                    sink(x, naive_at(self.img, x, y, self.half));
                }
            }
            SourceKind::Integral(ip) => {
                for x in 0..w {
                    sink(x, ip.at(x, y, self.half));
                }
            }
            SourceKind::Sampled { mask, linear } => {
                let half = self.half;
                let row_inside = y >= half && y + half < h;
                let px = self.img.pixels();
                for x in 0..w {
                    if row_inside && x >= half && x + half < w {
                        let base = (y * w + x) as isize;
                        let mut sum = 0.0f64;
                        let mut sqsum = 0.0f64;
                        for &off in linear {
                            let v = px[(base + off) as usize] as f64;
                            sum += v;
                            sqsum += v * v;
                        }
                        sink(x, WindowStats::from_moments(sum, sqsum, linear.len() as u32));
                    } else {
                        sink(x, sampled_clipped(self.img, mask.offsets(), x, y));
                    }
                }
            }
        }
    }

    /// Statistics for every pixel, row-major.
    pub fn compute_map(&self, exec: Execution) -> Vec<WindowStats> {
        let mut out = vec![WindowStats::default(); self.img.len()];
        for_each_row(&mut out, self.img.width(), exec, |y, row| {
            self.for_row(y, |x, s| row[x] = s);
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn win(w: usize) -> WindowSize {
        WindowSize::new(w).unwrap()
    }

    /// Two-pass reference over an explicit list of values.
    fn reference(values: &[f64]) -> (f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    fn ramp(w: usize, h: usize) -> GrayImage {
        GrayImage::new(w, h, (0..(w * h) as u32).map(|v| v as u8).collect()).unwrap()
    }

    #[test]
    fn constant_image_has_zero_std() {
        let img = GrayImage::filled(7, 6, 100);
        for (x, y) in [(0, 0), (3, 3), (6, 5)] {
            let s = window_stats_naive(&img, x, y, win(5)).unwrap();
            assert_eq!((s.mean, s.std), (100.0, 0.0));
        }
        let img = GrayImage::filled(30, 30, 255);
        let ip = build_integral(&img);
        let s = window_stats_integral(&ip, 15, 15, win(21)).unwrap();
        assert_eq!((s.mean, s.std), (255.0, 0.0));
        let mask = make_mask(Structure::Gs2, 9).unwrap();
        let s = window_stats_sampled(&GrayImage::filled(10, 10, 50), &mask, 0, 9).unwrap();
        assert_eq!((s.mean, s.std), (50.0, 0.0));
    }

    #[test]
    fn three_by_three_center_and_corner() {
        let img = ramp(3, 3);
        let (m, s) = reference(&[0., 1., 2., 3., 4., 5., 6., 7., 8.]);
        assert_eq!(m, 4.0);
        assert!((s - (60.0f64 / 9.0).sqrt()).abs() < 1e-12);
        let ip = build_integral(&img);
        for st in [
            window_stats_naive(&img, 1, 1, win(3)).unwrap(),
            window_stats_integral(&ip, 1, 1, win(3)).unwrap(),
        ] {
            assert_eq!(st.count, 9);
            assert_eq!(st.mean, 4.0);
            assert!((st.std - 2.581988897).abs() < 1e-6);
        }

        let corner = window_stats_naive(&img, 0, 0, win(3)).unwrap();
        let (m, s) = reference(&[0., 1., 3., 4.]);
        assert_eq!(corner.count, 4);
        assert_eq!(corner.mean, 2.0);
        assert_eq!(m, 2.0);
        assert!((corner.std - s).abs() < 1e-12);
        assert!((corner.std - 1.581).abs() < 1e-3);
    }

    #[test]
    fn cross_sample_on_five_by_five() {
        let img = ramp(5, 5);
        let mask = make_mask(Structure::Gs1, 5).unwrap();
        let st = window_stats_sampled(&img, &mask, 2, 2).unwrap();
        let (m, s) = reference(&[2., 7., 10., 11., 12., 13., 14., 17., 22.]);
        assert_eq!(st.count, 9);
        assert_eq!(st.mean, 12.0);
        assert_eq!(m, 12.0);
        assert!((st.std - s).abs() < 1e-12);
        assert!((st.std - 5.375).abs() < 1e-3);
    }

    #[test]
    fn integral_tables() {
        let one = build_integral(&GrayImage::filled(1, 1, 7));
        assert_eq!((one.sum_at(1, 1), one.sqsum_at(1, 1)), (7, 49));
        let zero = build_integral(&GrayImage::filled(4, 3, 0));
        assert!(zero.sum.iter().all(|&v| v == 0) && zero.sqsum.iter().all(|&v| v == 0));
        let ip = build_integral(&GrayImage::new(2, 2, vec![1, 2, 3, 4]).unwrap());
        assert_eq!((ip.sum_at(2, 2), ip.sqsum_at(2, 2)), (10, 30));
        assert_eq!(ip.sum_at(1, 2), 3);
        assert_eq!(ip.sum_at(2, 1), 4);
        for i in 0..=2 {
            assert_eq!(ip.sum_at(i, 0), 0);
            assert_eq!(ip.sum_at(0, i), 0);
        }
    }

    #[test]
    fn coordinate_errors() {
        let img = GrayImage::filled(4, 3, 0);
        let mask = make_mask(Structure::Gs1, 3).unwrap();
        assert!(matches!(
            window_stats_naive(&img, 4, 0, win(3)),
            Err(Error::OutOfBounds { x: 4, y: 0, width: 4, height: 3 })
        ));
        assert!(window_stats_integral(&build_integral(&img), 0, 3, win(3)).is_err());
        assert!(window_stats_sampled(&img, &mask, 9, 9).is_err());
    }

    #[test]
    fn wide_image_window_larger_than_image() {
        let img = ramp(3, 2);
        let all: Vec<f64> = img.pixels().iter().map(|&v| v as f64).collect();
        let (m, s) = reference(&all);
        let st = window_stats_naive(&img, 1, 1, win(31)).unwrap();
        assert_eq!(st.count, 6);
        assert!((st.mean - m).abs() < 1e-12 && (st.std - s).abs() < 1e-12);
    }

    fn arb_image() -> impl Strategy<Value = GrayImage> {
        (1usize..40, 1usize..40).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), w * h)
                .prop_map(move |px| GrayImage::new(w, h, px).unwrap())
        })
    }

    fn odd_window() -> impl Strategy<Value = usize> {
        (1usize..=15).prop_map(|k| 2 * k + 1)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn engines_agree_with_two_pass_reference(img in arb_image(), w in odd_window()) {
            let window = win(w);
            let ip = build_integral(&img);
            let full = make_mask(Structure::Full, w).unwrap();
            let half = (w / 2) as i64;
            for y in 0..img.height() {
                for x in 0..img.width() {
                    let mut vals = Vec::new();
                    for yy in (y as i64 - half)..=(y as i64 + half) {
                        for xx in (x as i64 - half)..=(x as i64 + half) {
                            if xx >= 0 && yy >= 0 && (xx as usize) < img.width() && (yy as usize) < img.height() {
                                vals.push(img.get(xx as usize, yy as usize) as f64);
                            }
                        }
                    }
                    let (m, s) = reference(&vals);
                    let naive = window_stats_naive(&img, x, y, window).unwrap();
                    let integral = window_stats_integral(&ip, x, y, window).unwrap();
                    let sampled = window_stats_sampled(&img, &full, x, y).unwrap();
                    prop_assert!((naive.mean - m).abs() <= 1e-9);
                    prop_assert!((naive.std - s).abs() <= 1e-6);
                    prop_assert!((integral.mean - naive.mean).abs() <= 1e-9);
                    prop_assert!((integral.std - naive.std).abs() <= 1e-6);
                    prop_assert_eq!(sampled, naive);
                    prop_assert_eq!(naive.count as usize, vals.len());
                    let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
                    let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
                    prop_assert!(naive.mean >= lo && naive.mean <= hi);
                    prop_assert!(naive.std >= 0.0 && naive.std <= 127.5);
                }
            }
        }

        #[test]
        fn shift_invariance(img in arb_image(), w in odd_window(), shift in 0u8..=64, s in 0usize..6) {
            let structure = Structure::SAMPLED[s];
            let low = GrayImage::new(img.width(), img.height(),
                img.pixels().iter().map(|&v| v / 2).collect()).unwrap();
            let high = GrayImage::new(img.width(), img.height(),
                low.pixels().iter().map(|&v| v + shift).collect()).unwrap();
            let c = shift as f64;
            for engine in Engine::ALL {
                let a = StatsSource::new(&low, engine, win(w), structure).unwrap().compute_map(Execution::Sequential);
                let b = StatsSource::new(&high, engine, win(w), structure).unwrap().compute_map(Execution::Sequential);
                for (p, q) in a.iter().zip(&b) {
                    prop_assert!((q.mean - p.mean - c).abs() <= 1e-9);
                    prop_assert!((q.std - p.std).abs() <= 1e-6);
                    prop_assert!(!q.std.is_nan());
                }
            }
        }

        #[test]
        fn row_paths_match_per_pixel(img in arb_image(), w in odd_window(), s in 0usize..6) {
            let structure = Structure::SAMPLED[s];
            let mask = make_mask(structure, w).unwrap();
            let src = StatsSource::new(&img, Engine::Sampled, win(w), structure).unwrap();
            let map = src.compute_map(Execution::Parallel);
            for y in 0..img.height() {
                for x in 0..img.width() {
                    let direct = window_stats_sampled(&img, &mask, x, y).unwrap();
                    prop_assert_eq!(map[y * img.width() + x], direct);
                    prop_assert_eq!(src.at(x, y).unwrap(), direct);
                }
            }
        }
    }
}
