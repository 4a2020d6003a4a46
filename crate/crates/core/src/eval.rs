//! Scoring against ground truth and `(W, k)` grid sweeps.
//!
//! The positive class is foreground (pixel value 0). Recall, precision and
//! F-measure are defined as 0 whenever their denominator is 0, so degenerate
//! predictions still rank instead of producing NaN.

use std::fmt::{self, Write as _};

use crate::binarize::{binarize_from_stats, BinarizationParams, Method};
use crate::error::{Error, Result};
use crate::imageio::{BinaryImage, GrayImage, Raster};
use crate::masks::WindowSize;
use crate::rows::Execution;
use crate::stats::StatsSource;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
    pub recall: f64,
    pub precision: f64,
    pub f_measure: f64,
}

impl EvalReport {
    pub fn from_counts(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let recall = ratio(tp, tp + fn_);
        let precision = ratio(tp, tp + fp);
        let f_measure = if recall + precision > 0.0 {
            2.0 * recall * precision / (recall + precision)
        } else {
            0.0
        };
        EvalReport {
            tp,
            tn,
            fp,
            fn_,
            recall,
            precision,
            f_measure,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn to_csv(&self) -> String {
        format!(
            "tp,tn,fp,fn,recall,precision,f_measure\n{},{},{},{},{:.6},{:.6},{:.6}\n",
            self.tp, self.tn, self.fp, self.fn_, self.recall, self.precision, self.f_measure
        )
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TP = {}", self.tp)?;
        writeln!(f, "TN = {}", self.tn)?;
        writeln!(f, "FP = {}", self.fp)?;
        writeln!(f, "FN = {}", self.fn_)?;
        writeln!(f, "R = {:.2}%", 100.0 * self.recall)?;
        writeln!(f, "P = {:.2}%", 100.0 * self.precision)?;
        writeln!(f, "FM = {:.2}%", 100.0 * self.f_measure)
    }
}

pub fn evaluate(pred: &BinaryImage, gt: &BinaryImage) -> Result<EvalReport> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::ShapeMismatch(
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height(),
        ));
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (&p, &g) in pred.pixels().iter().zip(gt.pixels()) {
        match (p == BinaryImage::FOREGROUND, g == BinaryImage::FOREGROUND) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(EvalReport::from_counts(tp, tn, fp, fn_))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepCell {
    pub window: usize,
    pub k: f64,
    pub f_measure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    /// Every grid cell, windows outermost, in grid order.
    pub cells: Vec<SweepCell>,
    pub best: SweepCell,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("w,k,f_measure\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{:.6}", c.window, c.k, c.f_measure);
        }
        out
    }
}

impl fmt::Display for SweepResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cells {
            writeln!(f, "W = {:>3}  k = {:<6}  FM = {:.2}%", c.window, c.k, 100.0 * c.f_measure)?;
        }
        writeln!(
            f,
            "best: W = {}, k = {}, FM = {:.2}%",
            self.best.window,
            self.best.k,
            100.0 * self.best.f_measure
        )
    }
}

/// `a` ranks above `b`: higher F-measure, then smaller window, then smaller k.
fn ranks_above(a: &SweepCell, b: &SweepCell) -> bool {
    if a.f_measure != b.f_measure {
        return a.f_measure > b.f_measure;
    }
    (a.window, a.k) < (b.window, b.k)
}

/// Evaluates every `(W, k)` cell. `base` fixes method, engine, mask and
/// dynamic ranges; `k` is applied to the base method. Window statistics do
/// not depend on `k`, so they are computed once per window.
pub fn sweep(
    img: &GrayImage,
    gt: &BinaryImage,
    base: &BinarizationParams,
    windows: &[usize],
    ks: &[f64],
) -> Result<SweepResult> {
    if windows.is_empty() || ks.is_empty() {
        return Err(Error::param("grid", "window and k grids must be non-empty"));
    }
    if !base.method.is_adaptive() {
        return Err(Error::param("method", format!("{} has no (W, k) parameters to sweep", base.method)));
    }
    if img.width() != gt.width() || img.height() != gt.height() {
        return Err(Error::ShapeMismatch(img.width(), img.height(), gt.width(), gt.height()));
    }

    let mut cells = Vec::with_capacity(windows.len() * ks.len());
    for &window in windows {
        let params: Vec<BinarizationParams> = ks
            .iter()
            .map(|&k| {
                let p = BinarizationParams { window, ..*base }.with_k(k);
                p.validate().map(|_| p).map_err(|e| Error::SweepCell {
                    window,
                    k,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()?;
        let size = WindowSize::new(window)?;
        let stats = StatsSource::new(img, base.engine, size, base.mask)?.compute_map(Execution::default());
        for (p, &k) in params.iter().zip(ks) {
            let pred = binarize_from_stats(img, &stats, p.rule());
            let report = evaluate(&pred, gt)?;
            cells.push(SweepCell {
                window,
                k,
                f_measure: report.f_measure,
            });
        }
    }
    let best = *cells
        .iter()
        .reduce(|best, c| if ranks_above(c, best) { c } else { best })
        .expect("non-empty grid");
    Ok(SweepResult { cells, best })
}

pub const DEFAULT_WINDOWS: [usize; 5] = [11, 15, 21, 31, 41];
pub const DEFAULT_K_SAUVOLA: [f64; 6] = [0.1, 0.2, 0.3, 0.34, 0.4, 0.5];
pub const DEFAULT_K_NIBLACK: [f64; 6] = [-0.5, -0.4, -0.3, -0.2, -0.1, 0.0];

pub fn default_k_grid(method: Method) -> &'static [f64] {
    match method {
        Method::Niblack => &DEFAULT_K_NIBLACK,
        _ => &DEFAULT_K_SAUVOLA,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binarize::{binarize, Engine};
    use proptest::prelude::*;

    fn bin(w: usize, fg: &[usize], n: usize) -> BinaryImage {
        let mut flags = vec![false; n];
        for &i in fg {
            flags[i] = true;
        }
        BinaryImage::from_mask(w, n / w, &flags).unwrap()
    }

    #[test]
    fn identical_images_score_perfectly() {
        let gt = bin(4, &[0, 5, 6], 16);
        let r = evaluate(&gt, &gt).unwrap();
        assert_eq!((r.recall, r.precision, r.f_measure), (1.0, 1.0, 1.0));
        assert_eq!((r.tp, r.tn, r.fp, r.fn_), (3, 13, 0, 0));
    }

    #[test]
    fn half_recall() {
        let gt = bin(10, &(0..10).collect::<Vec<_>>(), 40);
        let pred = bin(10, &(0..5).collect::<Vec<_>>(), 40);
        let r = evaluate(&pred, &gt).unwrap();
        assert_eq!((r.tp, r.fn_, r.fp), (5, 5, 0));
        assert_eq!(r.recall, 0.5);
        assert_eq!(r.precision, 1.0);
        assert!((r.f_measure - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.total(), 40);
    }

    #[test]
    fn degenerate_predictions() {
        let gt = bin(4, &[1, 2], 8);
        let empty = bin(4, &[], 8);
        let r = evaluate(&empty, &gt).unwrap();
        assert_eq!((r.tp, r.recall, r.precision, r.f_measure), (0, 0.0, 0.0, 0.0));
        let r = evaluate(&empty, &empty).unwrap();
        assert_eq!(r.f_measure, 0.0);
        assert!(!r.f_measure.is_nan());
    }

    #[test]
    fn shape_mismatch() {
        let a = bin(4, &[], 8);
        let b = bin(2, &[], 8);
        assert!(matches!(evaluate(&a, &b), Err(Error::ShapeMismatch(4, 2, 2, 4))));
    }

    fn blobs() -> (GrayImage, BinaryImage) {
        let img = GrayImage::from_fn(40, 40, |x, y| {
            if (x / 3) % 4 == 1 && y % 13 < 9 {
                30
            } else {
                190 + (x as u8 / 4)
            }
        });
        let gt = BinaryImage::from_mask(
            40,
            40,
            &img.pixels().iter().map(|&v| v == 30).collect::<Vec<_>>(),
        )
        .unwrap();
        (img, gt)
    }

    #[test]
    fn singleton_grid_and_cell_values() {
        let (img, gt) = blobs();
        let base = BinarizationParams {
            engine: Engine::Naive,
            ..Default::default()
        };
        let res = sweep(&img, &gt, &base, &[9], &[0.3]).unwrap();
        assert_eq!(res.cells.len(), 1);
        assert_eq!(res.best, res.cells[0]);
        let direct = binarize(&img, &BinarizationParams { window: 9, k_sauvola: 0.3, ..base }).unwrap().0;
        assert_eq!(res.best.f_measure, evaluate(&direct, &gt).unwrap().f_measure);
    }

    #[test]
    fn best_dominates_and_ties_prefer_small_window() {
        let (img, gt) = blobs();
        let base = BinarizationParams::default();
        let res = sweep(&img, &gt, &base, &[7, 11, 15], &[0.1, 0.34, 0.5]).unwrap();
        assert_eq!(res.cells.len(), 9);
        assert!(res.cells.iter().all(|c| c.f_measure <= res.best.f_measure));

        // Duplicate windows give equal F-measures; the smaller window wins.
        let img = GrayImage::filled(6, 6, 200);
        let gt = bin(6, &[0], 36);
        let res = sweep(&img, &gt, &base, &[9, 5], &[0.3, 0.2]).unwrap();
        assert_eq!((res.best.window, res.best.k), (5, 0.2));
    }

    #[test]
    fn sweep_errors() {
        let (img, gt) = blobs();
        let base = BinarizationParams::default();
        assert!(sweep(&img, &gt, &base, &[], &[0.3]).is_err());
        let err = sweep(&img, &gt, &base, &[11, 12], &[0.3]).unwrap_err();
        assert!(matches!(err, Error::SweepCell { window: 12, .. }), "{err}");
        let err = sweep(&img, &gt, &base, &[11], &[0.3, -1.0]).unwrap_err();
        assert!(matches!(err, Error::SweepCell { window: 11, k, .. } if k == -1.0), "{err}");
        let otsu = BinarizationParams { method: Method::Otsu, ..base };
        assert!(sweep(&img, &gt, &otsu, &[11], &[0.3]).is_err());
    }

    #[test]
    fn csv_and_text() {
        let (img, gt) = blobs();
        let res = sweep(&img, &gt, &BinarizationParams::default(), &[11], &[0.2, 0.3]).unwrap();
        let csv = res.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "w,k,f_measure");
        assert!(lines[1].starts_with("11,0.2,"));
        assert_eq!(lines.len(), 3);
        let report = evaluate(&gt, &gt).unwrap();
        assert!(report.to_string().contains("FM = 100.00%"));
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
        (1usize..200).prop_flat_map(|n| {
            (
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec(any::<bool>(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn scores_bounded_and_order_free((p, g) in arb_pair(), seed in any::<u64>()) {
            let n = p.len();
            let pred = BinaryImage::from_mask(n, 1, &p).unwrap();
            let gt = BinaryImage::from_mask(n, 1, &g).unwrap();
            let r = evaluate(&pred, &gt).unwrap();
            prop_assert_eq!(r.total() as usize, n);
            for v in [r.recall, r.precision, r.f_measure] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            // Same permutation applied to both images leaves the counts alone.
            let mut idx: Vec<usize> = (0..n).collect();
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let pp: Vec<bool> = idx.iter().map(|&i| p[i]).collect();
            let gg: Vec<bool> = idx.iter().map(|&i| g[i]).collect();
            let r2 = evaluate(&BinaryImage::from_mask(n, 1, &pp).unwrap(), &BinaryImage::from_mask(n, 1, &gg).unwrap()).unwrap();
            prop_assert_eq!(r, r2);

            if g.iter().any(|&f| f) {
                let perfect = evaluate(&gt, &gt).unwrap();
                prop_assert_eq!((perfect.recall, perfect.precision, perfect.f_measure), (1.0, 1.0, 1.0));
            }
        }

        #[test]
        fn fixing_a_false_negative_never_hurts((p, g) in arb_pair(), pick in any::<prop::sample::Index>()) {
            let missed: Vec<usize> = (0..p.len()).filter(|&i| g[i] && !p[i]).collect();
            prop_assume!(!missed.is_empty());
            let i = missed[pick.index(missed.len())];
            let n = p.len();
            let gt = BinaryImage::from_mask(n, 1, &g).unwrap();
            let before = evaluate(&BinaryImage::from_mask(n, 1, &p).unwrap(), &gt).unwrap();
            let mut fixed = p.clone();
            fixed[i] = true;
            let after = evaluate(&BinaryImage::from_mask(n, 1, &fixed).unwrap(), &gt).unwrap();
            prop_assert!(after.f_measure >= before.f_measure);
        }
    }
}
