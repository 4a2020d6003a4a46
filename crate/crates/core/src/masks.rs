//! Geometric sampling structures: fixed `O(W)` subsets of a `W x W` window.
//!
//! Offsets are window-relative `(dx, dy)` with the subject pixel at `(0, 0)`.
//! Every structure contains the center. Clipping at image borders is left to
//! the statistics engines.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Odd side length `W >= 3` of a square window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WindowSize(usize);

impl WindowSize {
    pub fn new(w: usize) -> Result<Self> {
        if w >= 3 && w % 2 == 1 {
            Ok(WindowSize(w))
        } else {
            Err(Error::InvalidWindow(w))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// `floor(W / 2)`, the reach of the window on each side of its center.
    #[inline]
    pub fn half(self) -> usize {
        self.0 / 2
    }
}

impl fmt::Display for WindowSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Structure {
    /// Center row and center column.
    Gs1,
    /// Both main diagonals.
    Gs2,
    /// Eight-ray star: `Gs1` and `Gs2` combined.
    Gs3,
    /// Center row and both main diagonals.
    Gs4,
    /// Window perimeter ring plus the center pixel.
    Gs5,
    /// `Gs1` combined with the perimeter ring.
    Gs6,
    /// Every window pixel.
    Full,
}

impl Structure {
    pub const SAMPLED: [Structure; 6] = [
        Structure::Gs1,
        Structure::Gs2,
        Structure::Gs3,
        Structure::Gs4,
        Structure::Gs5,
        Structure::Gs6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Structure::Gs1 => "gs1",
            Structure::Gs2 => "gs2",
            Structure::Gs3 => "gs3",
            Structure::Gs4 => "gs4",
            Structure::Gs5 => "gs5",
            Structure::Gs6 => "gs6",
            Structure::Full => "full",
        }
    }

    fn contains(self, dx: i32, dy: i32, half: i32) -> bool {
        let cross = dx == 0 || dy == 0;
        let diagonal = dx.abs() == dy.abs();
        let ring = dx.abs() == half || dy.abs() == half;
        let center = dx == 0 && dy == 0;
        match self {
            Structure::Gs1 => cross,
            Structure::Gs2 => diagonal,
            Structure::Gs3 => cross || diagonal,
            Structure::Gs4 => dy == 0 || diagonal,
            Structure::Gs5 => ring || center,
            Structure::Gs6 => cross || ring,
            Structure::Full => true,
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gs1" => Ok(Structure::Gs1),
            "gs2" => Ok(Structure::Gs2),
            "gs3" => Ok(Structure::Gs3),
            "gs4" => Ok(Structure::Gs4),
            "gs5" => Ok(Structure::Gs5),
            "gs6" => Ok(Structure::Gs6),
            "full" => Ok(Structure::Full),
            other => Err(Error::param(
                "mask",
                format!("unknown structure `{other}` (expected gs1..gs6 or full)"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingMask {
    structure: Structure,
    window: WindowSize,
    /// Unique `(dx, dy)` pairs in row-major order (by `dy`, then `dx`).
    offsets: Vec<(i32, i32)>,
}

impl SamplingMask {
    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn window(&self) -> WindowSize {
        self.window
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// One text row per window row, `#` for sampled cells and `.` otherwise.
    pub fn to_ascii(&self) -> String {
        let w = self.window.get();
        let half = self.window.half() as i32;
        let mut grid = vec![b'.'; w * w];
        for &(dx, dy) in &self.offsets {
            grid[(dy + half) as usize * w + (dx + half) as usize] = b'#';
        }
        let mut out = String::with_capacity(w * (w + 1));
        for row in grid.chunks(w) {
            out.push_str(std::str::from_utf8(row).expect("ascii"));
            out.push('\n');
        }
        out
    }
}

pub fn make_mask(structure: Structure, window: usize) -> Result<SamplingMask> {
    let window = WindowSize::new(window)?;
    let half = window.half() as i32;
    let offsets = (-half..=half)
        .flat_map(|dy| (-half..=half).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| structure.contains(dx, dy, half))
        .collect();
    Ok(SamplingMask {
        structure,
        window,
        offsets,
    })
}

/// Number of offsets in `make_mask(structure, window)`, in closed form.
pub fn mask_size(structure: Structure, window: usize) -> Result<usize> {
    let w = WindowSize::new(window)?.get();
    Ok(match structure {
        Structure::Gs1 | Structure::Gs2 => 2 * w - 1,
        Structure::Gs3 | Structure::Gs5 => 4 * w - 3,
        Structure::Gs4 => 3 * w - 2,
        // cross (2W-1) + ring (4W-4) - the 4 cells where they meet
        Structure::Gs6 => 6 * w - 9,
        Structure::Full => w * w,
    })
}
