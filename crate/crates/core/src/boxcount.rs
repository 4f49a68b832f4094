//! Box-counting statistics: occupied-box series, the capacity dimension
//! pipeline, and per-box mass measures for the moment spectra.
//!
//! Boxes live on a fixed grid anchored at the origin that tiles the short
//! image axis exactly: a scale is `eps = min(W, H) / m` for an integer box
//! count `m`, with the `m` ladder log-spaced so the `eps` ladder runs from
//! `min(W, H) / 2` down to ~2 pixels. Snapping to exact tilings keeps
//! boundary slivers from inflating the counts at coarse scales, which
//! otherwise biases the fitted slope several hundredths low. The smallest
//! and largest 10% of scales are trimmed from the fit to keep lattice
//! saturation at the extremes out of the slope estimate.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::image::{scharr_edges, EdgeMap, GrayImage, DEFAULT_EDGE_THRESHOLD};
use crate::regression::{ols, theil_sen_slope, FitLine};

pub const DEFAULT_NUM_SCALES: usize = 25;

/// Occupied-box counts over a decreasing scale ladder with the log-log fit.
#[derive(Debug, Clone, Serialize)]
pub struct BoxCountSeries {
    /// Box side lengths in pixels, strictly decreasing.
    pub scales: Vec<f64>,
    /// Boxes per short axis, aligned with `scales` (scale = extent / m).
    pub grid_sizes: Vec<usize>,
    /// Occupied-box counts N(eps), aligned with `scales`.
    pub counts: Vec<u64>,
    /// OLS fit of log N against log(1/eps) over the trimmed range.
    pub fit: FitLine,
    /// Theil-Sen slope over the same points, as a robustness diagnostic.
    pub theil_sen: f64,
    /// Index range `[lo, hi)` of `scales` used by the fit.
    pub fit_range: (usize, usize),
}

/// Log-spaced boxes-per-axis ladder: `m` from 2 up to `extent / 2`,
/// deduplicated after rounding, so `eps = extent / m` runs from half the
/// extent down to ~2 pixels.
pub fn log_spaced_grid_sizes(extent: usize, num_scales: usize) -> Vec<usize> {
    let m_max = (extent / 2).max(2);
    if num_scales < 2 || m_max == 2 {
        return vec![2];
    }
    let (lo, hi) = (2.0_f64.ln(), (m_max as f64).ln());
    let mut out: Vec<usize> = Vec::with_capacity(num_scales);
    for i in 0..num_scales {
        let t = i as f64 / (num_scales - 1) as f64;
        let m = (lo + t * (hi - lo)).exp().round() as usize;
        let m = m.clamp(2, m_max);
        if out.last() != Some(&m) {
            out.push(m);
        }
    }
    out
}

fn trimmed_range(len: usize) -> (usize, usize) {
    let trim = len / 10;
    let lo = trim;
    let hi = len - trim;
    if hi - lo >= 3 {
        (lo, hi)
    } else {
        (0, len)
    }
}

/// Count occupied boxes at each scale of the default ladder and fit the
/// log-log slope.
pub fn box_count(mask: &EdgeMap, num_scales: usize) -> Result<BoxCountSeries> {
    let set: Vec<(usize, usize)> = (0..mask.height)
        .flat_map(|y| (0..mask.width).map(move |x| (x, y)))
        .filter(|&(x, y)| mask.binary[y * mask.width + x])
        .collect();
    if set.is_empty() {
        return Err(CoreError::EmptyMask);
    }
    let extent = mask.width.min(mask.height);
    let grid_sizes = log_spaced_grid_sizes(extent, num_scales.max(2));
    let counts: Vec<u64> = grid_sizes
        .iter()
        .map(|&m| count_at_grid(&set, mask.width, mask.height, extent, m))
        .collect();
    Ok(series_from_counts(extent, grid_sizes, counts))
}

/// Boxes along an axis of length `len` when the short axis (`extent`) is
/// tiled by `m` boxes.
#[inline]
fn boxes_along(len: usize, extent: usize, m: usize) -> usize {
    (len - 1) * m / extent + 1
}

pub(crate) fn count_at_grid(
    set: &[(usize, usize)],
    width: usize,
    height: usize,
    extent: usize,
    m: usize,
) -> u64 {
    let bw = boxes_along(width, extent, m);
    let bh = boxes_along(height, extent, m);
    let mut occupied = vec![false; bw * bh];
    let mut count = 0u64;
    for &(x, y) in set {
        let idx = (y * m / extent) * bw + x * m / extent;
        if !occupied[idx] {
            occupied[idx] = true;
            count += 1;
        }
    }
    count
}

pub(crate) fn series_from_counts(
    extent: usize,
    grid_sizes: Vec<usize>,
    counts: Vec<u64>,
) -> BoxCountSeries {
    let scales: Vec<f64> = grid_sizes.iter().map(|&m| extent as f64 / m as f64).collect();
    let (lo, hi) = trimmed_range(scales.len());
    let x: Vec<f64> = scales[lo..hi].iter().map(|&e| (1.0 / e).ln()).collect();
    let y: Vec<f64> = counts[lo..hi].iter().map(|&c| (c as f64).ln()).collect();
    let fit = ols(&x, &y);
    let theil_sen = theil_sen_slope(&x, &y);
    BoxCountSeries { scales, grid_sizes, counts, fit, theil_sen, fit_range: (lo, hi) }
}

/// Capacity (box-counting) dimension with its fit diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityDimension {
    pub dimension: f64,
    pub r_squared: f64,
    pub theil_sen: f64,
    /// Set when the image is below the 64x64 recommendation.
    pub low_confidence: bool,
    pub series: BoxCountSeries,
}

/// Scharr edges -> binary mask -> box count -> slope. Constant images have
/// no edges and come back as `DegenerateInput`.
pub fn capacity_dimension(img: &GrayImage) -> Result<CapacityDimension> {
    capacity_dimension_with(img, DEFAULT_EDGE_THRESHOLD, DEFAULT_NUM_SCALES)
}

pub fn capacity_dimension_with(
    img: &GrayImage,
    edge_threshold: f64,
    num_scales: usize,
) -> Result<CapacityDimension> {
    let edges = scharr_edges(img, edge_threshold)?;
    let series = match box_count(&edges, num_scales) {
        Err(CoreError::EmptyMask) => {
            return Err(CoreError::DegenerateInput(
                "no edges detected; capacity dimension undefined".into(),
            ))
        }
        other => other?,
    };
    Ok(CapacityDimension {
        dimension: series.fit.slope,
        r_squared: series.fit.r_squared,
        theil_sen: series.theil_sen,
        low_confidence: img.width < 64 || img.height < 64,
        series,
    })
}

/// Normalized box masses at one scale; zero-mass boxes are dropped so the
/// negative moments stay finite.
#[derive(Debug, Clone, Serialize)]
pub struct BoxMassGrid {
    pub scale: f64,
    pub masses: Vec<f64>,
}

impl BoxMassGrid {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// Integrate the Scharr magnitude per box at each grid size and normalize
/// to a probability measure. The magnitude (not the binary mask) carries
/// the mass so the higher moments do not degenerate.
pub fn magnitude_box_masses(edges: &EdgeMap, grid_sizes: &[usize]) -> Result<Vec<BoxMassGrid>> {
    let total: f64 = edges.magnitude.iter().sum();
    if total <= 0.0 {
        return Err(CoreError::EmptyMask);
    }
    let (w, h) = (edges.width, edges.height);
    let extent = w.min(h);
    // Summed-area table for O(1) box sums.
    let mut sat = vec![0.0; (w + 1) * (h + 1)];
    for y in 0..h {
        for x in 0..w {
            sat[(y + 1) * (w + 1) + (x + 1)] = edges.magnitude[y * w + x]
                + sat[y * (w + 1) + (x + 1)]
                + sat[(y + 1) * (w + 1) + x]
                - sat[y * (w + 1) + x];
        }
    }
    let box_sum = |x0: usize, y0: usize, x1: usize, y1: usize| -> f64 {
        sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] - sat[y1 * (w + 1) + x0]
            + sat[y0 * (w + 1) + x0]
    };
    // Pixel x belongs to box j iff x*m/extent == j, so box j spans
    // [ceil(j*extent/m), ceil((j+1)*extent/m)).
    let bound = |j: usize, m: usize| -> usize { (j * extent).div_ceil(m) };
    let mut grids = Vec::with_capacity(grid_sizes.len());
    for &m in grid_sizes {
        let bw = boxes_along(w, extent, m);
        let bh = boxes_along(h, extent, m);
        let mut masses = Vec::new();
        for by in 0..bh {
            let y0 = bound(by, m).min(h);
            let y1 = bound(by + 1, m).min(h);
            for bx in 0..bw {
                let x0 = bound(bx, m).min(w);
                let x1 = bound(bx + 1, m).min(w);
                let s = box_sum(x0, y0, x1, y1);
                if s > 0.0 {
                    masses.push(s / total);
                }
            }
        }
        grids.push(BoxMassGrid { scale: extent as f64 / m as f64, masses });
    }
    Ok(grids)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn full_mask(n: usize) -> EdgeMap {
        EdgeMap::from_binary(n, n, vec![true; n * n]).unwrap()
    }

    #[test]
    fn full_square_has_slope_two() {
        let series = box_count(&full_mask(512), 25).unwrap();
        assert!(
            (series.fit.slope - 2.0).abs() <= 0.02,
            "slope {}",
            series.fit.slope
        );
    }

    #[test]
    fn single_pixel_has_slope_zero() {
        let mut bits = vec![false; 256 * 256];
        bits[100 * 256 + 37] = true;
        let mask = EdgeMap::from_binary(256, 256, bits).unwrap();
        let series = box_count(&mask, 25).unwrap();
        assert!(series.counts.iter().all(|&c| c == 1));
        assert_eq!(series.fit.slope, 0.0);
    }

    #[test]
    fn counts_non_decreasing_as_scales_shrink() {
        let series = box_count(&full_mask(300), 25).unwrap();
        for w in series.counts.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for w in series.scales.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn empty_mask_is_an_error() {
        let mask = EdgeMap::from_binary(32, 32, vec![false; 32 * 32]).unwrap();
        assert!(matches!(box_count(&mask, 25), Err(CoreError::EmptyMask)));
    }

    #[test]
    fn box_masses_normalize_per_scale() {
        let img = GrayImage::new(
            64,
            64,
            (0..64 * 64).map(|i| ((i * 37) % 97) as f64 / 96.0).collect(),
        )
        .unwrap();
        let edges = scharr_edges(&img, 0.1).unwrap();
        let grids = magnitude_box_masses(&edges, &[2, 4, 8, 16, 32]).unwrap();
        for g in &grids {
            assert!((g.total() - 1.0).abs() < 1e-9);
            assert!(g.masses.iter().all(|&m| m > 0.0));
        }
    }

    #[test]
    fn mass_boxes_partition_their_scale() {
        // Uniform magnitude: every box mass equals its pixel share, and the
        // box count at grid size m is exactly m^2 on a square image.
        let edges = EdgeMap::from_binary(60, 60, vec![true; 3600]).unwrap();
        let grids = magnitude_box_masses(&edges, &[3, 5, 6]).unwrap();
        for (g, m) in grids.iter().zip([3usize, 5, 6]) {
            assert_eq!(g.masses.len(), m * m);
            assert!((g.total() - 1.0).abs() < 1e-12);
        }
    }
}
