//! The three comparison watermarkers behind one embed/detect interface:
//! LSB tiling, classical block-DCT quantization on one mid-frequency
//! coefficient, and classical level-2 DWT quantization. Detection mirrors
//! the main method's Pearson-threshold verdict so the robustness
//! comparison is protocol-fair.
//!
//! The transform methods embed by snapping the carrier coefficient to the
//! even or odd lattice of a quantization step (binary dither QIM), which
//! keeps the no-attack round trip exact and makes the embedding
//! distortion content-independent. Steps are tuned once so each
//! baseline's no-attack PSNR sits within about 1 dB of the feature
//! method's on the synthetic desk corpus (equal-distortion comparison).
//! Readout differs per scheme, as in the textbook constructions: the DCT
//! method soft-combines its per-block repetitions before correlating,
//! LSB votes per tiled bit, and the DWT method correlates per-coefficient
//! hard decisions.

use serde::{Deserialize, Serialize};

use fractalmark_core::{dct2, haar_dwt2, haar_idwt2, idct2, partition_blocks, reassemble_blocks, GrayImage};

use crate::error::{MarkError, Result};
use crate::watermark::{pearson, DetectionResult};

/// Fixed mid-frequency slot for the classical DCT method.
const DCT_SLOT: (usize, usize) = (3, 4);
/// Coefficient stride for the classical DWT method (level-2 LH/HL bands).
const DWT_STRIDE: usize = 4;
/// Block-to-bit interleaving stride (coprime with 64), so localized damage
/// spreads evenly over the payload bits instead of bursting.
const DCT_INTERLEAVE: usize = 37;

#[inline]
fn dct_bit_index(block_index: usize) -> usize {
    (block_index * DCT_INTERLEAVE) % PAYLOAD_BITS
}

/// Keyed per-block dither in [0, step): shifts each block's lattice so
/// erased (smoothed-out) blocks decode as zero-mean noise instead of a
/// systematic parity. Standard dither-modulation practice.
#[inline]
fn dct_dither(payload: u64, block_index: usize, step: f64) -> f64 {
    let mut z = payload ^ (block_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 * step
}

pub const PAYLOAD_BITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Lsb,
    DctClassic,
    DwtClassic,
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::Lsb => "lsb",
            BaselineKind::DctClassic => "dct",
            BaselineKind::DwtClassic => "dwt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    /// 64-bit payload pattern, fixed per evaluation run.
    pub payload: u64,
    /// Quantization step for the transform methods (ignored by LSB);
    /// zero disables the embedding.
    pub strength: f64,
}

impl BaselineConfig {
    pub fn new(kind: BaselineKind, payload: u64) -> Self {
        let strength = match kind {
            BaselineKind::Lsb => 0.0,
            BaselineKind::DctClassic => 0.090,
            BaselineKind::DwtClassic => 0.060,
        };
        Self { kind, payload, strength }
    }
}

#[inline]
fn payload_bit(payload: u64, index: usize) -> bool {
    (payload >> (index % PAYLOAD_BITS)) & 1 == 1
}

#[inline]
fn bit_sign(payload: u64, index: usize) -> f64 {
    if payload_bit(payload, index) {
        1.0
    } else {
        -1.0
    }
}

/// Snap to the nearest lattice point whose parity encodes `bit`:
/// even multiples of `step` for 0, odd multiples for 1.
#[inline]
fn qim_embed_value(value: f64, step: f64, bit: bool) -> f64 {
    if step <= 0.0 {
        return value;
    }
    let offset = if bit { 0.5 } else { 0.0 };
    (((value / step) - offset).round() + offset) * step
}

/// Decode the parity of the nearest lattice point.
#[inline]
fn qim_decode_value(value: f64, step: f64) -> bool {
    if step <= 0.0 {
        return false;
    }
    let half_steps = (value / (0.5 * step)).round() as i64;
    half_steps.rem_euclid(2) == 1
}

/// Soft parity decision in [-1, 1]: +1 at an odd lattice point, -1 at an
/// even one, linear in between.
#[inline]
fn qim_decode_soft(value: f64, step: f64) -> f64 {
    if step <= 0.0 {
        return 0.0;
    }
    let d_even = (value - step * (value / step).round()).abs();
    let odd = step * ((value / step - 0.5).round() + 0.5);
    let d_odd = (value - odd).abs();
    ((d_even - d_odd) / (step / 2.0)).clamp(-1.0, 1.0)
}

fn check_size(img: &GrayImage) -> Result<()> {
    if img.width < 64 || img.height < 64 {
        return Err(MarkError::Core(fractalmark_core::CoreError::ImageTooSmall {
            width: img.width,
            height: img.height,
            min: 64,
        }));
    }
    Ok(())
}

pub fn baseline_embed(img: &GrayImage, cfg: &BaselineConfig) -> Result<GrayImage> {
    check_size(img)?;
    match cfg.kind {
        BaselineKind::Lsb => Ok(lsb_embed(img, cfg.payload)),
        BaselineKind::DctClassic => dct_embed(img, cfg),
        BaselineKind::DwtClassic => Ok(dwt_embed(img, cfg)),
    }
}

pub fn baseline_detect(img: &GrayImage, cfg: &BaselineConfig, threshold: f64) -> Result<DetectionResult> {
    check_size(img)?;
    let r = match cfg.kind {
        BaselineKind::Lsb => lsb_correlation(img, cfg.payload),
        BaselineKind::DctClassic => dct_correlation(img, cfg)?,
        BaselineKind::DwtClassic => dwt_correlation(img, cfg),
    };
    Ok(match r {
        Some(r) => DetectionResult { r, detected: r > threshold, threshold, zero_variance: false },
        None => DetectionResult { r: 0.0, detected: false, threshold, zero_variance: true },
    })
}

// --- LSB ---

fn lsb_embed(img: &GrayImage, payload: u64) -> GrayImage {
    let data = img
        .data
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let q = (v * 255.0).round() as u16;
            let q = (q & !1) | payload_bit(payload, i) as u16;
            q as f64 / 255.0
        })
        .collect();
    GrayImage { width: img.width, height: img.height, data }
}

/// Read the LSBs directly; exact payload recovery absent any attack.
pub fn lsb_read(img: &GrayImage) -> Vec<bool> {
    img.data
        .iter()
        .map(|&v| ((v * 255.0).round() as u16) & 1 == 1)
        .collect()
}

fn lsb_correlation(img: &GrayImage, payload: u64) -> Option<f64> {
    // Per-bit vote fractions against the tiled payload.
    let mut votes = [0.0f64; PAYLOAD_BITS];
    let mut counts = [0.0f64; PAYLOAD_BITS];
    for (i, &v) in img.data.iter().enumerate() {
        let bit = ((v * 255.0).round() as u16) & 1;
        votes[i % PAYLOAD_BITS] += bit as f64;
        counts[i % PAYLOAD_BITS] += 1.0;
    }
    let fractions: Vec<f64> = votes.iter().zip(&counts).map(|(v, c)| v / c.max(1.0)).collect();
    let reference: Vec<f64> = (0..PAYLOAD_BITS).map(|i| payload_bit(payload, i) as u8 as f64).collect();
    pearson(&fractions, &reference)
}

// --- classical DCT ---

fn dct_embed(img: &GrayImage, cfg: &BaselineConfig) -> Result<GrayImage> {
    let blocks = partition_blocks(img, 8)?;
    let mut out = Vec::with_capacity(blocks.len());
    for (bi, block) in blocks.iter().enumerate() {
        let mut coeffs = dct2(&block.data, 8, 8)?;
        let dither = dct_dither(cfg.payload, bi, cfg.strength);
        let slot = coeffs.at_mut(DCT_SLOT.0, DCT_SLOT.1);
        *slot = qim_embed_value(*slot - dither, cfg.strength, payload_bit(cfg.payload, dct_bit_index(bi)))
            + dither;
        let mut b = block.clone();
        b.data = idct2(&coeffs);
        for v in &mut b.data {
            *v = v.clamp(0.0, 1.0);
        }
        out.push(b);
    }
    Ok(reassemble_blocks(img.width, img.height, &out)?)
}

fn dct_correlation(img: &GrayImage, cfg: &BaselineConfig) -> Result<Option<f64>> {
    let blocks = partition_blocks(img, 8)?;
    // Soft repetition readout under two weightings. Uniform weights suit
    // dense perturbations (noise spread over every block); confidence
    // weights (|soft|^16) suit erasures, where ambiguous smoothed-out
    // repetitions would otherwise dilute the exact survivors. The
    // detector takes the stronger of the two correlations.
    let mut plain = [0.0f64; PAYLOAD_BITS];
    let mut counts = [0.0f64; PAYLOAD_BITS];
    let mut weighted = [0.0f64; PAYLOAD_BITS];
    let mut weights = [0.0f64; PAYLOAD_BITS];
    for (bi, block) in blocks.iter().enumerate() {
        let coeffs = dct2(&block.data, 8, 8)?;
        let dither = dct_dither(cfg.payload, bi, cfg.strength);
        let soft = qim_decode_soft(coeffs.at(DCT_SLOT.0, DCT_SLOT.1) - dither, cfg.strength);
        let k = dct_bit_index(bi);
        plain[k] += soft;
        counts[k] += 1.0;
        let w = soft.powi(16);
        weighted[k] += soft * w;
        weights[k] += w;
    }
    let plain_votes: Vec<f64> = plain.iter().zip(&counts).map(|(v, c)| v / c.max(1.0)).collect();
    let weighted_votes: Vec<f64> = weighted
        .iter()
        .zip(&weights)
        .map(|(v, w)| if *w > 0.0 { v / w } else { 0.0 })
        .collect();
    let reference: Vec<f64> = (0..PAYLOAD_BITS).map(|i| bit_sign(cfg.payload, i)).collect();
    let r_plain = pearson(&plain_votes, &reference);
    let r_weighted = pearson(&weighted_votes, &reference);
    Ok(match (r_plain, r_weighted) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    })
}

// --- classical DWT ---

/// Slot positions in a level-2 band at the configured stride.
fn dwt_slots(rows: usize, cols: usize) -> Vec<usize> {
    let mut slots = Vec::new();
    let mut i = 0;
    while i < rows * cols {
        slots.push(i);
        i += DWT_STRIDE;
    }
    slots
}

fn dwt_embed(img: &GrayImage, cfg: &BaselineConfig) -> GrayImage {
    let mut pyr = haar_dwt2(img, 2).expect("image >= 64x64 admits 2 levels");
    let mut bit_index = 0usize;
    {
        let level = &mut pyr.levels[1];
        for band in [&mut level.lh, &mut level.hl] {
            for &slot in &dwt_slots(band.rows, band.cols) {
                band.data[slot] =
                    qim_embed_value(band.data[slot], cfg.strength, payload_bit(cfg.payload, bit_index));
                bit_index += 1;
            }
        }
    }
    let grid = haar_idwt2(&pyr);
    GrayImage {
        width: img.width,
        height: img.height,
        data: grid.data.into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
    }
}

fn dwt_correlation(img: &GrayImage, cfg: &BaselineConfig) -> Option<f64> {
    let pyr = haar_dwt2(img, 2).ok()?;
    let level = &pyr.levels[1];
    // Hard per-coefficient decisions, no repetition combining.
    let mut observed = Vec::new();
    let mut reference = Vec::new();
    let mut bit_index = 0usize;
    for band in [&level.lh, &level.hl] {
        for &slot in &dwt_slots(band.rows, band.cols) {
            let decoded = qim_decode_value(band.data[slot], cfg.strength);
            observed.push(if decoded { 1.0 } else { -1.0 });
            reference.push(bit_sign(cfg.payload, bit_index));
            bit_index += 1;
        }
    }
    pearson(&observed, &reference)
}
