//! Pixel containers and the spatial-domain operators shared by every
//! analysis stage: luma conversion, Scharr edge detection, PSNR, and
//! block partitioning.
//!
//! All intensities are `f64` in `[0, 1]`. Eight-bit I/O quantizes with
//! `round(v * 255)` at the codec boundary only, so no quantization error
//! accumulates across transform round-trips.

use crate::error::{CoreError, Result};

/// Multi-channel raster image, interleaved row-major, intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    /// 1 (grayscale) or 3 (RGB).
    pub channels: usize,
    pub data: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(CoreError::InvalidImage(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(CoreError::InvalidImage(format!(
                "data length {} != {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(CoreError::InvalidImage(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(Self { width, height, channels, data })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn pixel(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }
}

/// Single-channel image, the substrate of the analysis pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(CoreError::InvalidImage(format!(
                "data length {} != {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(CoreError::InvalidImage(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Replicate-padded lookup for convolution kernels.
    #[inline]
    pub fn at_clamped(&self, x: isize, y: isize) -> f64 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.data[yc * self.width + xc]
    }

    pub fn to_raster(&self) -> RasterImage {
        RasterImage {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self.data.clone(),
        }
    }
}

impl TryFrom<RasterImage> for GrayImage {
    type Error = CoreError;
    fn try_from(img: RasterImage) -> Result<Self> {
        if img.channels == 1 {
            GrayImage::new(img.width, img.height, img.data)
        } else {
            Ok(to_gray(&img))
        }
    }
}

/// Gradient magnitude plus its thresholded binary mask.
#[derive(Debug, Clone)]
pub struct EdgeMap {
    pub width: usize,
    pub height: usize,
    pub magnitude: Vec<f64>,
    pub binary: Vec<bool>,
    /// Absolute threshold actually applied (fraction-of-max resolved).
    pub threshold: f64,
}

impl EdgeMap {
    /// Build an edge map directly from a mask; used by synthetic fixtures
    /// (Sierpinski rasters and the like) that have no gradient source.
    pub fn from_binary(width: usize, height: usize, binary: Vec<bool>) -> Result<Self> {
        if binary.len() != width * height {
            return Err(CoreError::InvalidImage(format!(
                "mask length {} != {}x{}",
                binary.len(),
                width,
                height
            )));
        }
        let magnitude = binary.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Ok(Self { width, height, magnitude, binary, threshold: 0.5 })
    }

    pub fn count_set(&self) -> usize {
        self.binary.iter().filter(|&&b| b).count()
    }
}

/// Default fraction-of-max threshold for edge binarization.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 0.1;

/// Rec. 601 luma conversion; 1-channel input passes through unchanged.
pub fn to_gray(img: &RasterImage) -> GrayImage {
    if img.channels == 1 {
        return GrayImage {
            width: img.width,
            height: img.height,
            data: img.data.clone(),
        };
    }
    let mut data = Vec::with_capacity(img.width * img.height);
    for px in img.data.chunks_exact(3) {
        // Weights sum to 1, so the result stays in [0, 1].
        data.push(0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]);
    }
    GrayImage { width: img.width, height: img.height, data }
}

/// 3x3 Scharr gradient with replicate-padded borders.
///
/// `threshold` is a fraction of the maximum magnitude in `(0, 1)`; the
/// binary mask keeps pixels with `magnitude >= threshold * max`.
pub fn scharr_edges(img: &GrayImage, threshold: f64) -> Result<EdgeMap> {
    if img.width < 3 || img.height < 3 {
        return Err(CoreError::ImageTooSmall { width: img.width, height: img.height, min: 3 });
    }
    if !(0.0..1.0).contains(&threshold) || threshold <= 0.0 {
        return Err(CoreError::InvalidImage(format!(
            "edge threshold {threshold} outside (0, 1)"
        )));
    }
    let (w, h) = (img.width, img.height);
    let mut magnitude = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for dy in -1..=1_isize {
                for dx in -1..=1_isize {
                    let v = img.at_clamped(x as isize + dx, y as isize + dy);
                    gx += v * SCHARR_X[(dy + 1) as usize][(dx + 1) as usize];
                    gy += v * SCHARR_Y[(dy + 1) as usize][(dx + 1) as usize];
                }
            }
            let m = (gx * gx + gy * gy).sqrt();
            // Kernels sum to zero; cancellation residue on flat regions is
            // numerical noise, not gradient.
            magnitude[y * w + x] = if m < 1e-9 { 0.0 } else { m };
        }
    }
    let max = magnitude.iter().cloned().fold(0.0, f64::max);
    let abs_threshold = threshold * max;
    let binary = if max > 0.0 {
        magnitude.iter().map(|&m| m >= abs_threshold).collect()
    } else {
        vec![false; w * h]
    };
    Ok(EdgeMap { width: w, height: h, magnitude, binary, threshold: abs_threshold })
}

const SCHARR_X: [[f64; 3]; 3] = [[-3.0, 0.0, 3.0], [-10.0, 0.0, 10.0], [-3.0, 0.0, 3.0]];
const SCHARR_Y: [[f64; 3]; 3] = [[-3.0, -10.0, -3.0], [0.0, 0.0, 0.0], [3.0, 10.0, 3.0]];

/// Peak signal-to-noise ratio in dB for unit-range intensities.
/// Returns `f64::INFINITY` when the images are identical.
pub fn psnr(reference: &RasterImage, test: &RasterImage) -> Result<f64> {
    if reference.width != test.width
        || reference.height != test.height
        || reference.channels != test.channels
    {
        return Err(CoreError::DimensionMismatch(
            reference.width,
            reference.height,
            test.width,
            test.height,
        ));
    }
    let mse = reference
        .data
        .iter()
        .zip(&test.data)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.data.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

/// Convenience wrapper for grayscale pairs.
pub fn psnr_gray(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    psnr(&reference.to_raster(), &test.to_raster())
}

/// One tile of a block partition. `valid_w`/`valid_h` record how much of
/// the tile is covered by real pixels; the rest is zero padding.
#[derive(Debug, Clone)]
pub struct Block {
    pub x0: usize,
    pub y0: usize,
    pub size: usize,
    pub valid_w: usize,
    pub valid_h: usize,
    pub data: Vec<f64>,
}

/// Ceil-tiling of the image into `block x block` tiles, zero-padding the
/// last partial row/column of tiles.
pub fn partition_blocks(img: &GrayImage, block: usize) -> Result<Vec<Block>> {
    if block < 2 {
        return Err(CoreError::InvalidImage(format!("block size {block} < 2")));
    }
    let bx = img.width.div_ceil(block);
    let by = img.height.div_ceil(block);
    let mut blocks = Vec::with_capacity(bx * by);
    for byi in 0..by {
        for bxi in 0..bx {
            let x0 = bxi * block;
            let y0 = byi * block;
            let valid_w = block.min(img.width - x0);
            let valid_h = block.min(img.height - y0);
            let mut data = vec![0.0; block * block];
            for y in 0..valid_h {
                for x in 0..valid_w {
                    data[y * block + x] = img.at(x0 + x, y0 + y);
                }
            }
            blocks.push(Block { x0, y0, size: block, valid_w, valid_h, data });
        }
    }
    Ok(blocks)
}

/// Inverse of [`partition_blocks`]: crops padding via the coverage map and
/// reassembles the original image bit-exactly.
pub fn reassemble_blocks(width: usize, height: usize, blocks: &[Block]) -> Result<GrayImage> {
    let mut data = vec![0.0; width * height];
    for b in blocks {
        for y in 0..b.valid_h {
            for x in 0..b.valid_w {
                data[(b.y0 + y) * width + (b.x0 + x)] = b.data[y * b.size + x];
            }
        }
    }
    GrayImage::new(width, height, data)
}
