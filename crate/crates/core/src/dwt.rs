//! Multi-level 2D Haar DWT with perfect reconstruction.
//!
//! Orthonormal convention: each pairwise step is `(a + b)/sqrt(2)`,
//! `(a - b)/sqrt(2)`. Odd lengths are handled by symmetric extension of one
//! sample, so every sub-band has `ceil(n / 2)` entries per axis. Sub-band
//! naming: `lh` is the horizontal detail (high-pass along x), `hl` the
//! vertical detail (high-pass along y), `hh` the diagonal detail.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{CoreError, Result};
use crate::image::GrayImage;

/// Dense row-major grid of wavelet coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

#[derive(Debug, Clone)]
pub struct DwtLevel {
    pub lh: Grid,
    pub hl: Grid,
    pub hh: Grid,
    /// Dimensions of the grid this level decomposed, needed to undo the
    /// odd-length extension on reconstruction.
    pub input_rows: usize,
    pub input_cols: usize,
}

/// Haar decomposition: detail bands per level (level 1 first) plus the
/// final approximation band.
#[derive(Debug, Clone)]
pub struct DwtPyramid {
    pub levels: Vec<DwtLevel>,
    pub ll: Grid,
    pub width: usize,
    pub height: usize,
}

#[inline]
fn analyze_pair(a: f64, b: f64) -> (f64, f64) {
    ((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2)
}

fn analyze_rows(input: &Grid) -> (Grid, Grid) {
    let half = input.cols.div_ceil(2);
    let mut low = Grid::zeros(input.rows, half);
    let mut high = Grid::zeros(input.rows, half);
    for r in 0..input.rows {
        for k in 0..half {
            let a = input.at(r, 2 * k);
            let b = if 2 * k + 1 < input.cols { input.at(r, 2 * k + 1) } else { a };
            let (l, h) = analyze_pair(a, b);
            low.data[r * half + k] = l;
            high.data[r * half + k] = h;
        }
    }
    (low, high)
}

fn analyze_cols(input: &Grid) -> (Grid, Grid) {
    let half = input.rows.div_ceil(2);
    let mut low = Grid::zeros(half, input.cols);
    let mut high = Grid::zeros(half, input.cols);
    for k in 0..half {
        for c in 0..input.cols {
            let a = input.at(2 * k, c);
            let b = if 2 * k + 1 < input.rows { input.at(2 * k + 1, c) } else { a };
            let (l, h) = analyze_pair(a, b);
            low.data[k * input.cols + c] = l;
            high.data[k * input.cols + c] = h;
        }
    }
    (low, high)
}

fn synth_rows(low: &Grid, high: &Grid, cols: usize) -> Grid {
    let mut out = Grid::zeros(low.rows, cols);
    for r in 0..low.rows {
        for k in 0..low.cols {
            let a = (low.at(r, k) + high.at(r, k)) * FRAC_1_SQRT_2;
            let b = (low.at(r, k) - high.at(r, k)) * FRAC_1_SQRT_2;
            out.data[r * cols + 2 * k] = a;
            if 2 * k + 1 < cols {
                out.data[r * cols + 2 * k + 1] = b;
            }
        }
    }
    out
}

fn synth_cols(low: &Grid, high: &Grid, rows: usize) -> Grid {
    let mut out = Grid::zeros(rows, low.cols);
    for k in 0..low.rows {
        for c in 0..low.cols {
            let a = (low.at(k, c) + high.at(k, c)) * FRAC_1_SQRT_2;
            let b = (low.at(k, c) - high.at(k, c)) * FRAC_1_SQRT_2;
            out.data[(2 * k) * low.cols + c] = a;
            if 2 * k + 1 < rows {
                out.data[(2 * k + 1) * low.cols + c] = b;
            }
        }
    }
    out
}

fn decompose_level(input: &Grid) -> (Grid, DwtLevel) {
    let (row_low, row_high) = analyze_rows(input);
    let (ll, hl) = analyze_cols(&row_low);
    let (lh, hh) = analyze_cols(&row_high);
    (
        ll,
        DwtLevel { lh, hl, hh, input_rows: input.rows, input_cols: input.cols },
    )
}

/// Multi-level Haar analysis of a grayscale image.
pub fn haar_dwt2(img: &GrayImage, levels: usize) -> Result<DwtPyramid> {
    if levels == 0 || img.width.min(img.height) < (1usize << levels) {
        return Err(CoreError::TooManyLevels {
            levels,
            width: img.width,
            height: img.height,
        });
    }
    let mut current = Grid {
        rows: img.height,
        cols: img.width,
        data: img.data.clone(),
    };
    let mut out_levels = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (ll, level) = decompose_level(&current);
        out_levels.push(level);
        current = ll;
    }
    Ok(DwtPyramid { levels: out_levels, ll: current, width: img.width, height: img.height })
}

/// Perfect-reconstruction inverse of [`haar_dwt2`].
pub fn haar_idwt2(pyr: &DwtPyramid) -> Grid {
    let mut current = pyr.ll.clone();
    for level in pyr.levels.iter().rev() {
        let row_low = synth_cols(&current, &level.hl, level.input_rows);
        let row_high = synth_cols(&level.lh, &level.hh, level.input_rows);
        current = synth_rows(&row_low, &row_high, level.input_cols);
    }
    current
}
