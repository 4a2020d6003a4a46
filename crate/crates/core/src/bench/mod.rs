//! Wall-clock timing of the statistics engines and their memory model.
//!
//! Timed runs are single-threaded so that measured growth in `W` reflects
//! per-pixel cost: the naive engine touches `W^2` pixels, the sampled engine
//! `O(W)`, the integral engine a constant four table cells.

pub mod alloc;
pub mod synthetic;

use std::collections::hash_map::DefaultHasher;
use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};
use std::time::Instant;

use crate::binarize::{binarize_image, BinarizationParams, Engine, Method};
use crate::error::{Error, Result};
use crate::imageio::{GrayImage, Raster};
use crate::masks::Structure;
use crate::rows::Execution;

pub use synthetic::{gen_synthetic, Ramp, SyntheticSpec};

/// Modelled working memory of a full-image binarization: the input plus a
/// same-sized output for the naive and sampled engines, plus 32-bit and
/// 64-bit summed-area tables for the integral engine. Constant terms are 0.
pub fn memory_model(engine: Engine, image_bytes: u64) -> Result<u64> {
    if image_bytes == 0 {
        return Err(Error::param("image_bytes", "must be positive"));
    }
    Ok(match engine {
        Engine::Naive | Engine::Sampled => 2 * image_bytes,
        Engine::Integral => 12 * image_bytes,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub engine: Engine,
    pub method: Method,
    /// Image width (columns).
    pub n: usize,
    pub height: usize,
    pub window: usize,
    pub reps: usize,
    pub median_s: f64,
    /// Naive median over this engine's median for the same method, size and
    /// window.
    pub speedup: f64,
    /// Hash of the binarized output of the timed runs.
    pub output_digest: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemoryRow {
    pub engine: Engine,
    pub image_bytes: u64,
    pub model_bytes: u64,
    /// Input size plus the heap high-water mark of one run, when the
    /// tracking allocator is installed.
    pub measured_peak_bytes: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub timings: Vec<TimingRow>,
    pub memory: Vec<MemoryRow>,
}

impl BenchReport {
    pub fn row(&self, engine: Engine, window: usize) -> Option<&TimingRow> {
        self.timings
            .iter()
            .find(|r| r.engine == engine && r.window == window)
    }

    /// Median times of `engine` as `(W, seconds)` in window order.
    pub fn series(&self, engine: Engine) -> Vec<(usize, f64)> {
        let mut s: Vec<_> = self
            .timings
            .iter()
            .filter(|r| r.engine == engine)
            .map(|r| (r.window, r.median_s))
            .collect();
        s.sort_by_key(|p| p.0);
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("engine,method,n,w,reps,median_s,speedup\n");
        for r in &self.timings {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.6},{:.3}",
                r.engine, r.method, r.n, r.window, r.reps, r.median_s, r.speedup
            );
        }
        out
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<9} {:<8} {:>10} {:>4} {:>4} {:>12} {:>8}",
            "engine", "method", "size", "W", "reps", "median (s)", "speedup"
        )?;
        for r in &self.timings {
            writeln!(
                f,
                "{:<9} {:<8} {:>10} {:>4} {:>4} {:>12.6} {:>7.2}x",
                r.engine,
                r.method,
                format!("{}x{}", r.n, r.height),
                r.window,
                r.reps,
                r.median_s,
                r.speedup
            )?;
        }
        if !self.memory.is_empty() {
            writeln!(f)?;
            writeln!(f, "{:<9} {:>12} {:>14} {:>14}", "engine", "Sz (bytes)", "model (bytes)", "measured")?;
            for m in &self.memory {
                let measured = m
                    .measured_peak_bytes
                    .map_or_else(|| "n/a".to_string(), |b| b.to_string());
                writeln!(
                    f,
                    "{:<9} {:>12} {:>14} {:>14}",
                    m.engine, m.image_bytes, m.model_bytes, measured
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub method: Method,
    pub mask: Structure,
    pub windows: Vec<usize>,
    pub reps: usize,
    pub engines: Vec<Engine>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            method: Method::Sauvola,
            mask: Structure::Gs3,
            windows: vec![11, 21, 41, 81],
            reps: 5,
            engines: Engine::ALL.to_vec(),
        }
    }
}

fn digest(pixels: &[u8]) -> u64 {
    let mut h = DefaultHasher::new();
    pixels.hash(&mut h);
    h.finish()
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

/// Times full-image binarization for each engine and window.
///
/// Repetitions are interleaved across engines so slow drift in machine load
/// affects all engines alike. Each measured run includes per-engine setup
/// (integral tables, mask construction) and excludes I/O.
pub fn time_engines(img: &GrayImage, config: &BenchConfig) -> Result<BenchReport> {
    if config.reps < 3 {
        return Err(Error::param("reps", format!("{} is below the minimum of 3", config.reps)));
    }
    if !config.method.is_adaptive() {
        return Err(Error::param("method", "only adaptive methods have engines to time"));
    }
    if config.windows.is_empty() || config.engines.is_empty() {
        return Err(Error::param("windows", "nothing to time"));
    }
    let base = BinarizationParams {
        method: config.method,
        mask: config.mask,
        ..Default::default()
    };
    let mut timings = Vec::new();
    for &window in &config.windows {
        let params: Vec<BinarizationParams> = config
            .engines
            .iter()
            .map(|&engine| BinarizationParams { engine, window, ..base })
            .collect();
        for p in &params {
            p.validate()?;
        }
        let mut samples = vec![Vec::with_capacity(config.reps); params.len()];
        let mut digests = vec![0u64; params.len()];
        for _ in 0..config.reps {
            for (i, p) in params.iter().enumerate() {
                let start = Instant::now();
                let out = binarize_image(img, p, Execution::Sequential)?;
                samples[i].push(start.elapsed().as_secs_f64());
                digests[i] = digest(out.pixels());
            }
        }
        let medians: Vec<f64> = samples.iter_mut().map(|s| median(s)).collect();
        let naive = config
            .engines
            .iter()
            .position(|&e| e == Engine::Naive)
            .map(|i| medians[i]);
        for (i, p) in params.iter().enumerate() {
            timings.push(TimingRow {
                engine: p.engine,
                method: p.method,
                n: img.width(),
                height: img.height(),
                window,
                reps: config.reps,
                median_s: medians[i],
                speedup: naive.map_or(f64::NAN, |n| n / medians[i]),
                output_digest: digests[i],
            });
        }
    }

    let window = config.windows[0];
    let image_bytes = img.len() as u64;
    let mut memory = Vec::new();
    for &engine in &config.engines {
        let params = BinarizationParams { engine, window, ..base };
        memory.push(MemoryRow {
            engine,
            image_bytes,
            model_bytes: memory_model(engine, image_bytes)?,
            measured_peak_bytes: measure_peak(img, &params)?,
        });
    }
    Ok(BenchReport { timings, memory })
}

fn measure_peak(img: &GrayImage, params: &BinarizationParams) -> Result<Option<u64>> {
    if !alloc::is_active() {
        return Ok(None);
    }
    let baseline = alloc::reset_peak();
    let out = binarize_image(img, params, Execution::Sequential)?;
    let high = alloc::peak();
    drop(out);
    Ok(Some(img.len() as u64 + high.saturating_sub(baseline) as u64))
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binarize::binarize;

    #[test]
    fn memory_model_values() {
        assert_eq!(memory_model(Engine::Naive, 786_432).unwrap(), 1_572_864);
        for sz in [1u64, 7, 786_432, 1 << 40] {
            let naive = memory_model(Engine::Naive, sz).unwrap();
            assert_eq!(memory_model(Engine::Integral, sz).unwrap(), 6 * naive);
            assert_eq!(memory_model(Engine::Sampled, sz).unwrap(), naive);
        }
        assert!(memory_model(Engine::Naive, 0).is_err());
    }

    #[test]
    fn slope_of_power_laws() {
        let lin: Vec<_> = [11.0, 21.0, 41.0, 81.0].iter().map(|&w| (w, 3.0 * w)).collect();
        let quad: Vec<_> = [11.0, 21.0, 41.0, 81.0].iter().map(|&w| (w, 0.5 * w * w)).collect();
        assert!((loglog_slope(&lin) - 1.0).abs() < 1e-12);
        assert!((loglog_slope(&quad) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn timing_does_not_change_outputs() {
        let (img, _) = gen_synthetic(&SyntheticSpec {
            width: 96,
            height: 64,
            ..Default::default()
        })
        .unwrap();
        let config = BenchConfig {
            windows: vec![5, 9],
            reps: 3,
            ..Default::default()
        };
        let report = time_engines(&img, &config).unwrap();
        assert_eq!(report.timings.len(), 6);
        for row in &report.timings {
            let params = BinarizationParams {
                engine: row.engine,
                window: row.window,
                ..Default::default()
            };
            let (untimed, _) = binarize(&img, &params).unwrap();
            assert_eq!(row.output_digest, digest(untimed.pixels()));
            assert!(row.median_s > 0.0);
        }
        let naive = report.row(Engine::Naive, 9).unwrap();
        assert_eq!(naive.speedup, 1.0);
        let integral = report.row(Engine::Integral, 9).unwrap();
        assert!((integral.speedup - naive.median_s / integral.median_s).abs() < 1e-12);
        assert_eq!(report.memory.len(), 3);
        assert_eq!(report.memory[1].model_bytes, 12 * 96 * 64);

        let csv = report.to_csv();
        assert!(csv.starts_with("engine,method,n,w,reps,median_s,speedup\n"));
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.lines().nth(1).unwrap().starts_with("naive,sauvola,96,5,3,"));
    }

    #[test]
    fn rejects_too_few_reps() {
        let img = GrayImage::filled(8, 8, 9);
        let config = BenchConfig {
            reps: 2,
            ..Default::default()
        };
        assert!(matches!(
            time_engines(&img, &config),
            Err(Error::InvalidParam { field: "reps", .. })
        ));
    }
}
