//! Document image binarization with interchangeable window-statistics engines.
//!
//! Global thresholding uses Otsu's method. Locally adaptive thresholding
//! (Niblack, Sauvola) computes a per-pixel threshold from the mean and
//! standard deviation of a `W x W` neighbourhood, obtained from one of three
//! engines:
//!
//! * [`Engine::Naive`]: scans every window pixel, `O(W^2)` per pixel.
//! * [`Engine::Integral`]: summed-area tables, `O(1)` per pixel but twelve
//!   bytes of table per image byte.
//! * [`Engine::Sampled`]: scans a fixed `O(W)` subset of the window chosen by
//!   a [`masks::Structure`], with no auxiliary memory.
//!
//! The [`eval`] module scores results with recall, precision and F-measure and
//! sweeps `(W, k)` grids; [`bench`] times the engines and models their memory.

pub mod bench;
pub mod binarize;
pub mod cli;
mod error;
pub mod eval;
pub mod imageio;
pub mod masks;
mod rows;
pub mod stats;

pub use binarize::{binarize, BinarizationParams, Engine, Method, ThresholdMap};
pub use error::{Error, ParseError, Result};
pub use eval::{evaluate, sweep, EvalReport, SweepResult};
pub use imageio::{read_pnm, to_gray, write_pnm, BinaryImage, ColorImage, GrayImage, PnmImage};
pub use masks::{make_mask, mask_size, SamplingMask, Structure, WindowSize};
pub use rows::Execution;
pub use stats::{IntegralPair, WindowStats};
