//! The feature watermark: construction from fractal/turbulence features,
//! adaptive mid-frequency DCT embedding with chaotic sign spreading,
//! semi-blind extraction, and Pearson detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fractalmark_core::{
    capacity_dimension, dct2, idct2, partition_blocks, reassemble_blocks, turbulence_stats,
    GrayImage,
};

use crate::chaos::{lorenz_bits, ChaoticBits, LorenzConfig};
use crate::error::{MarkError, Result};
use crate::strength::{local_strength, StrengthMap};

/// Detection threshold shared by every method in the protocol.
pub const DETECTION_THRESHOLD: f64 = 0.95;

/// The 2x2 feature watermark [[D, mu], [sigma, 0]]. The (1,1) entry is
/// structurally zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WatermarkMatrix {
    /// Capacity dimension of the source image, in (0, 2.2].
    pub d: f64,
    /// Mean high-frequency sub-band power, 0-255 intensity convention.
    pub mu: f64,
    /// Spread of the high-frequency power, same convention and units as mu.
    pub sigma: f64,
}

impl WatermarkMatrix {
    pub fn new(d: f64, mu: f64, sigma: f64) -> Result<Self> {
        if !(d > 0.0 && d <= 2.2) || mu < 0.0 || sigma < 0.0 || !(mu.is_finite() && sigma.is_finite()) {
            return Err(MarkError::InvalidConfig(format!(
                "watermark entries out of range: d={d}, mu={mu}, sigma={sigma}"
            )));
        }
        Ok(Self { d, mu, sigma })
    }

    /// Row-major flattening of [[D, mu], [sigma, 0]].
    pub fn flatten(&self) -> [f64; 4] {
        [self.d, self.mu, self.sigma, 0.0]
    }

    pub fn max_abs(&self) -> f64 {
        self.d.abs().max(self.mu.abs()).max(self.sigma.abs())
    }
}

/// Embedding knobs. Defaults keep the default-strength embedding above the
/// 40 dB imperceptibility floor while sitting squarely in the mid-band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedConfig {
    /// Base strength in DCT-coefficient units.
    pub alpha_base: f64,
    /// Upper bound for the strength search.
    pub alpha_max: f64,
    /// Texture adaptation parameter, in [0, 2].
    pub gamma: f64,
    /// Block size, default 8.
    pub block: usize,
    /// Mid-frequency (u, v) coefficient slots; must exclude DC and the
    /// highest-frequency corner.
    pub band: Vec<(usize, usize)>,
    /// Local window k for the per-block fractal dimension, k >= 17.
    pub local_window: usize,
    /// Feature quantization bit depth, in [4, 16].
    pub quant_bits: u8,
    pub chaos: LorenzConfig,
    /// Detection threshold T.
    pub threshold: f64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            alpha_base: 4.0 / 255.0,
            alpha_max: 0.1,
            gamma: 0.5,
            block: 8,
            band: vec![(1, 2), (2, 1), (2, 2), (3, 1)],
            local_window: 33,
            quant_bits: 8,
            chaos: LorenzConfig::default(),
            threshold: DETECTION_THRESHOLD,
        }
    }
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block < 2 {
            return Err(MarkError::InvalidConfig(format!("block {} < 2", self.block)));
        }
        if self.band.is_empty() {
            return Err(MarkError::InvalidConfig("band is empty".into()));
        }
        let corner = (self.block - 1, self.block - 1);
        for &(u, v) in &self.band {
            if (u, v) == (0, 0) || (u, v) == corner {
                return Err(MarkError::InvalidConfig(format!(
                    "band slot ({u}, {v}) must exclude DC and the high corner"
                )));
            }
            if u >= self.block || v >= self.block {
                return Err(MarkError::InvalidConfig(format!(
                    "band slot ({u}, {v}) outside {0}x{0} block",
                    self.block
                )));
            }
        }
        if !(0.0..=2.0).contains(&self.gamma) {
            return Err(MarkError::InvalidConfig(format!("gamma {} outside [0, 2]", self.gamma)));
        }
        if !(4..=16).contains(&self.quant_bits) {
            return Err(MarkError::InvalidConfig(format!(
                "quant_bits {} outside [4, 16]",
                self.quant_bits
            )));
        }
        if self.local_window < 17 {
            return Err(MarkError::InvalidConfig(format!(
                "local_window {} < 17 (local box counting needs >= 4 scales)",
                self.local_window
            )));
        }
        if !(self.alpha_base >= 0.0 && self.alpha_max > 0.0) {
            return Err(MarkError::InvalidConfig("alpha must be non-negative".into()));
        }
        self.chaos.validate()
    }
}

/// Everything the semi-blind detector needs besides the image: the stored
/// original watermark, the unit-normalization scale, the config echo, and
/// a digest of the strength map actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedReceipt {
    pub version: String,
    pub watermark: WatermarkMatrix,
    /// Max-abs scale that normalized the watermark before embedding.
    pub w_scale: f64,
    pub config: EmbedConfig,
    /// SHA-256 over the per-block strength map (LE f64 bytes).
    pub strength_digest: String,
}

pub const RECEIPT_VERSION: &str = "fractalmark-receipt/1";

/// Correlation verdict for a watermark pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionResult {
    pub r: f64,
    pub detected: bool,
    pub threshold: f64,
    /// Set when one of the flattened matrices was constant; r is reported
    /// as 0 and detection fails.
    pub zero_variance: bool,
}

/// Build W = [[D, mu], [sigma, 0]] from the image's own features. The
/// turbulence entries use the 0-255 convention (mu, and the power spread
/// in the same units) so the matrix magnitudes match the published
/// metadata convention.
pub fn build_watermark(img: &GrayImage) -> Result<WatermarkMatrix> {
    let capacity = capacity_dimension(img)?;
    let turb = turbulence_stats(img, 1)?;
    // Slopes can drift a hair past 2 on dense masks; clamp into the
    // matrix's documented domain.
    let d = capacity.dimension.clamp(0.01, 2.2);
    WatermarkMatrix::new(d, turb.mean_power_u8, turb.std_power_u8)
}

/// Derive the chaotic sign bits for an embedding run: one bit per
/// (block, slot) pair.
pub fn embedding_bits(cfg: &EmbedConfig, num_blocks: usize) -> Result<ChaoticBits> {
    let n = (num_blocks * cfg.band.len()).max(8);
    lorenz_bits(&cfg.chaos, n)
}

/// Adaptive mid-frequency embedding: per block, add
/// `alpha_local * w_hat[slot] * sign(block, slot)` to each band slot of the
/// orthonormal DCT, then invert and clamp to [0, 1].
pub fn embed(
    img: &GrayImage,
    watermark: &WatermarkMatrix,
    bits: &ChaoticBits,
    cfg: &EmbedConfig,
) -> Result<(GrayImage, EmbedReceipt)> {
    cfg.validate()?;
    let strengths = local_strength(img, cfg)?;
    let watermarked = embed_with_strengths(img, watermark, bits, cfg, &strengths)?;
    let receipt = EmbedReceipt {
        version: RECEIPT_VERSION.to_string(),
        watermark: *watermark,
        w_scale: watermark.max_abs(),
        config: cfg.clone(),
        strength_digest: strength_digest(&strengths),
    };
    Ok((watermarked, receipt))
}

/// Embedding body with a precomputed strength map; `optimize_strength`
/// reuses this to avoid recomputing local dimensions per candidate alpha.
pub(crate) fn embed_with_strengths(
    img: &GrayImage,
    watermark: &WatermarkMatrix,
    bits: &ChaoticBits,
    cfg: &EmbedConfig,
    strengths: &StrengthMap,
) -> Result<GrayImage> {
    let blocks = partition_blocks(img, cfg.block)?;
    if blocks.len() < 4 {
        return Err(MarkError::TooFewBlocks { blocks: blocks.len() });
    }
    let scale = watermark.max_abs();
    if scale <= 0.0 {
        return Err(MarkError::InvalidConfig("watermark is all zeros".into()));
    }
    let flat = watermark.flatten();
    let w_hat: Vec<f64> = flat.iter().map(|v| v / scale).collect();

    let slots = cfg.band.len();
    let processed: Vec<_> = blocks
        .par_iter()
        .enumerate()
        .map(|(bi, block)| {
            let mut coeffs = dct2(&block.data, block.size, block.size)?;
            let alpha = strengths.values[bi];
            for (j, &(u, v)) in cfg.band.iter().enumerate() {
                let w_entry = w_hat[j % w_hat.len()];
                let sign = bits.sign(bi * slots + j);
                *coeffs.at_mut(u, v) += alpha * w_entry * sign;
            }
            let mut out = block.clone();
            out.data = idct2(&coeffs);
            for v in &mut out.data {
                *v = v.clamp(0.0, 1.0);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    Ok(reassemble_blocks(img.width, img.height, &processed)?)
}

pub(crate) fn strength_digest(strengths: &StrengthMap) -> String {
    let mut hasher = Sha256::new();
    for v in &strengths.values {
        hasher.update(v.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

/// Semi-blind extraction: recompute the feature watermark from the
/// (possibly attacked) image. The receipt must echo the config in use.
pub fn extract(img: &GrayImage, receipt: &EmbedReceipt, cfg: &EmbedConfig) -> Result<WatermarkMatrix> {
    if receipt.config != *cfg || receipt.version != RECEIPT_VERSION {
        return Err(MarkError::ReceiptMismatch);
    }
    build_watermark(img)
}

/// Pearson correlation between the flattened matrices; detected iff r > T.
pub fn detect(original: &WatermarkMatrix, extracted: &WatermarkMatrix, threshold: f64) -> DetectionResult {
    let a = original.flatten();
    let b = extracted.flatten();
    match pearson(&a, &b) {
        Some(r) => DetectionResult { r, detected: r > threshold, threshold, zero_variance: false },
        None => DetectionResult { r: 0.0, detected: false, threshold, zero_variance: true },
    }
}

/// Pearson r of two equal-length vectors; `None` when either is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
        sab += (x - ma) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detect_identical_is_one() {
        let w = WatermarkMatrix::new(1.88, 2067.82, 3552.45).unwrap();
        let res = detect(&w, &w, 0.95);
        assert!((res.r - 1.0).abs() < 1e-12);
        assert!(res.detected);
    }

    #[test]
    fn detect_sign_flip_is_minus_one() {
        // The structural zero stays put, so the flattened pair is exactly
        // anti-proportional only after centering; Pearson handles that.
        let w = WatermarkMatrix::new(1.88, 2067.82, 3552.45).unwrap();
        let a = w.flatten();
        let b: Vec<f64> = a.iter().map(|v| -v).collect();
        let r = pearson(&a, &b).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn detect_reference_magnitudes_with_one_percent_drift() {
        let w = WatermarkMatrix::new(1.88, 2067.82, 3552.45).unwrap();
        let drifted = WatermarkMatrix::new(1.88 * 1.01, 2067.82 * 1.01, 3552.45 * 1.01).unwrap();
        let res = detect(&w, &drifted, 0.95);
        assert!(res.r > 0.999, "r = {}", res.r);
        assert!(res.detected);
    }

    #[test]
    fn detect_zero_variance_is_diagnosed() {
        // A constant flattened vector cannot correlate.
        let w = WatermarkMatrix { d: 0.0, mu: 0.0, sigma: 0.0 };
        let other = WatermarkMatrix::new(1.5, 10.0, 20.0).unwrap();
        let res = detect(&w, &other, 0.95);
        assert!(res.zero_variance);
        assert!(!res.detected);
        assert_eq!(res.r, 0.0);
    }

    #[test]
    fn watermark_matrix_rejects_out_of_range() {
        assert!(WatermarkMatrix::new(0.0, 1.0, 1.0).is_err());
        assert!(WatermarkMatrix::new(2.5, 1.0, 1.0).is_err());
        assert!(WatermarkMatrix::new(1.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn config_validation_catches_bad_band() {
        let mut cfg = EmbedConfig::default();
        cfg.band.push((0, 0));
        assert!(cfg.validate().is_err());
        let cfg = EmbedConfig { band: vec![(7, 7)], ..EmbedConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn constant_image_is_degenerate() {
        let img = GrayImage::filled(128, 128, 0.5).unwrap();
        assert!(matches!(
            build_watermark(&img),
            Err(MarkError::Core(fractalmark_core::CoreError::DegenerateInput(_)))
        ));
    }

    #[test]
    fn too_few_blocks_is_rejected() {
        // An 8x8 image admits a single 8x8 block.
        let data: Vec<f64> = (0..64).map(|i| (i % 2) as f64).collect();
        let img = GrayImage::new(8, 8, data).unwrap();
        let w = WatermarkMatrix::new(1.5, 10.0, 20.0).unwrap();
        let cfg = EmbedConfig::default();
        let bits = crate::chaos::lorenz_bits(&cfg.chaos, 8).unwrap();
        let strengths = crate::strength::StrengthMap {
            block_cols: 1,
            block_rows: 1,
            values: vec![cfg.alpha_base],
        };
        assert!(matches!(
            embed_with_strengths(&img, &w, &bits, &cfg, &strengths),
            Err(MarkError::TooFewBlocks { blocks: 1 })
        ));
    }
}
