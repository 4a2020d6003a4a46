//! The `docbin` command line.
//!
//! Exit status: 0 on success, 1 on usage errors (bad flags or parameter
//! values), 2 on I/O or image-format errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{gen_synthetic, time_engines, BenchConfig, SyntheticSpec};
use crate::binarize::{binarize, BinarizationParams, Engine, Method};
use crate::error::Error;
use crate::eval::{default_k_grid, evaluate, sweep, DEFAULT_WINDOWS};
use crate::imageio::{read_pnm, BinaryImage, GrayImage, PnmImage, Raster};
use crate::masks::{make_mask, Structure};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "docbin", version, about = "Document image binarization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a PPM color image to a PGM gray image.
    Gray { input: PathBuf, output: PathBuf },
    /// Binarize a PGM/PPM image into a bi-level PGM.
    Binarize {
        #[command(flatten)]
        params: ParamArgs,
        /// Threshold for the selected method (default: 0.34 sauvola, -0.2 niblack).
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
        #[arg(long, default_value_t = 21)]
        window: usize,
        /// Also write the per-pixel thresholds, rounded and clamped, as PGM.
        #[arg(long)]
        threshold_map: Option<PathBuf>,
        input: PathBuf,
        output: PathBuf,
    },
    /// Score a bi-level prediction against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
    },
    /// Evaluate a (window, k) grid and report the best cell.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated odd window sizes.
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<usize>>,
        /// Comma-separated k values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ks: Option<Vec<f64>>,
        /// Write the full grid as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        input: PathBuf,
        gt: PathBuf,
    },
    /// Time every engine across window sizes.
    Bench {
        /// Image to time; a synthetic document is generated when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1024)]
        width: usize,
        #[arg(long, default_value_t = 768)]
        height: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "sauvola")]
        method: Method,
        #[arg(long, default_value = "gs3")]
        mask: Structure,
        #[arg(long, value_delimiter = ',', default_value = "11,21,41,81")]
        windows: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print a sampling structure as ASCII art.
    MaskShow { structure: Structure, window: usize },
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long, default_value = "sauvola")]
    method: Method,
    #[arg(long, default_value = "sampled")]
    engine: Engine,
    #[arg(long, default_value = "gs3")]
    mask: Structure,
    /// Dynamic range of the standard deviation (naive and integral engines).
    #[arg(long, default_value_t = 128.0)]
    r: f64,
    /// Dynamic range of the sampled standard deviation.
    #[arg(long, default_value_t = 128.0)]
    r_sampled: f64,
}

impl ParamArgs {
    fn params(&self, window: usize) -> BinarizationParams {
        BinarizationParams {
            method: self.method,
            engine: self.engine,
            mask: self.mask,
            window,
            r: self.r,
            r_sampled: self.r_sampled,
            ..Default::default()
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParam { .. } | Error::InvalidWindow(_) | Error::SweepCell { .. } => EXIT_USAGE,
        Error::Parse(_) | Error::Io(_) | Error::ShapeMismatch(..) | Error::OutOfBounds { .. } => EXIT_IO,
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Error> {
    std::fs::read(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    std::fs::write(path, bytes).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn load_gray(path: &Path) -> Result<GrayImage, Error> {
    Ok(read_pnm(&read_file(path)?)?.into_gray())
}

fn load_binary(path: &Path) -> Result<BinaryImage, Error> {
    let img = load_gray(path)?;
    BinaryImage::try_from(img).map_err(|e| {
        Error::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("{}: not a bi-level image ({e})", path.display()),
        ))
    })
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Error> {
    match command {
        Command::Gray { input, output } => {
            let img = match read_pnm(&read_file(&input)?)? {
                PnmImage::Color(c) => crate::imageio::to_gray(&c),
                PnmImage::Gray(g) => g,
            };
            write_file(&output, &img.to_pnm())?;
        }
        Command::Binarize {
            params,
            k,
            window,
            threshold_map,
            input,
            output,
        } => {
            let mut p = params.params(window);
            if let Some(k) = k {
                p = p.with_k(k);
            }
            p.validate()?;
            let img = load_gray(&input)?;
            let (bin, map) = binarize(&img, &p)?;
            write_file(&output, &bin.to_pnm())?;
            if let Some(path) = threshold_map {
                write_file(&path, &map.to_gray().to_pnm())?;
            }
            writeln!(
                out,
                "{}: {}x{}, {} foreground pixels",
                output.display(),
                img.width(),
                img.height(),
                bin.foreground_count()
            )?;
        }
        Command::Eval { pred, gt } => {
            let report = evaluate(&load_binary(&pred)?, &load_binary(&gt)?)?;
            write!(out, "{report}")?;
        }
        Command::Sweep {
            params,
            windows,
            ks,
            csv,
            input,
            gt,
        } => {
            let base = params.params(21);
            let windows = windows.unwrap_or_else(|| DEFAULT_WINDOWS.to_vec());
            let ks = ks.unwrap_or_else(|| default_k_grid(base.method).to_vec());
            if !base.method.is_adaptive() {
                return Err(Error::param("method", "otsu has no (W, k) parameters to sweep"));
            }
            let img = load_gray(&input)?;
            let gt = load_binary(&gt)?;
            let result = sweep(&img, &gt, &base, &windows, &ks)?;
            if let Some(path) = csv {
                write_file(&path, result.to_csv().as_bytes())?;
            }
            write!(out, "{result}")?;
        }
        Command::Bench {
            input,
            width,
            height,
            seed,
            method,
            mask,
            windows,
            reps,
            csv,
        } => {
            let img = match input {
                Some(path) => load_gray(&path)?,
                None => {
                    gen_synthetic(&SyntheticSpec {
                        width,
                        height,
                        noise_seed: seed,
                        ..Default::default()
                    })?
                    .0
                }
            };
            let config = BenchConfig {
                method,
                mask,
                windows,
                reps,
                ..Default::default()
            };
            let report = time_engines(&img, &config)?;
            if let Some(path) = csv {
                write_file(&path, report.to_csv().as_bytes())?;
            }
            write!(out, "{report}")?;
        }
        Command::MaskShow { structure, window } => {
            let mask = make_mask(structure, window)?;
            write!(out, "{}", mask.to_ascii())?;
        }
    }
    Ok(())
}
