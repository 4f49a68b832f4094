//! Network-free loss components exposed as standalone image metrics:
//! Gram matrix, total variation, texture energy, and the vertical-flow
//! (drip) statistic. No training loop lives here; the weights type only
//! packages the published coefficients for callers that combine terms.

use serde::Serialize;

use crate::image::RasterImage;

/// Loss-term weights. `alpha`, `beta`, `gamma` carry the published
/// defaults; the texture and drip weights were never stated upstream and
/// default to 1 so the metrics pass through unweighted.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StyleLossWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl Default for StyleLossWeights {
    fn default() -> Self {
        Self { alpha: 0.001, beta: 1e7, gamma: 0.005, delta: 1.0, epsilon: 1.0 }
    }
}

/// G = F F^T / (C H W) for a feature map flattened to `channels` rows of
/// `spatial` samples each.
pub fn gram_matrix(features: &[f64], channels: usize, spatial: usize) -> Vec<f64> {
    assert_eq!(features.len(), channels * spatial);
    assert!(channels >= 1 && spatial >= 1);
    let norm = (channels * spatial) as f64;
    let mut gram = vec![0.0; channels * channels];
    for i in 0..channels {
        for j in i..channels {
            let mut acc = 0.0;
            for k in 0..spatial {
                acc += features[i * spatial + k] * features[j * spatial + k];
            }
            let v = acc / norm;
            gram[i * channels + j] = v;
            gram[j * channels + i] = v;
        }
    }
    gram
}

/// Mean absolute forward differences along both axes, normalized by
/// B*C*H*W with B = 1. The last row/column is dropped (no wraparound).
pub fn tv_loss(img: &RasterImage) -> f64 {
    let (w, h, c) = (img.width, img.height, img.channels);
    let norm = (c * h * w) as f64;
    let mut acc = 0.0;
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let v = img.pixel(x, y, ch);
                if x + 1 < w {
                    acc += (v - img.pixel(x + 1, y, ch)).abs();
                }
                if y + 1 < h {
                    acc += (v - img.pixel(x, y + 1, ch)).abs();
                }
            }
        }
    }
    acc / norm
}

/// (mean dx^2 + mean dy^2) / (C H W) with forward differences.
pub fn texture_loss(img: &RasterImage) -> f64 {
    let (w, h, c) = (img.width, img.height, img.channels);
    let norm = (c * h * w) as f64;
    let mut sum_dx = 0.0;
    let mut n_dx = 0usize;
    let mut sum_dy = 0.0;
    let mut n_dy = 0usize;
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let v = img.pixel(x, y, ch);
                if x + 1 < w {
                    let d = img.pixel(x + 1, y, ch) - v;
                    sum_dx += d * d;
                    n_dx += 1;
                }
                if y + 1 < h {
                    let d = img.pixel(x, y + 1, ch) - v;
                    sum_dy += d * d;
                    n_dy += 1;
                }
            }
        }
    }
    let mean_dx = if n_dx > 0 { sum_dx / n_dx as f64 } else { 0.0 };
    let mean_dy = if n_dy > 0 { sum_dy / n_dy as f64 } else { 0.0 };
    (mean_dx + mean_dy) / norm
}

/// -mean(|dy|)/(CHW) + mean(|dy - mean(dy)|)/(CHW) over forward vertical
/// differences; negative values reward strong uniform vertical flow.
pub fn drip_loss(img: &RasterImage) -> f64 {
    let (w, h, c) = (img.width, img.height, img.channels);
    if h < 2 {
        return 0.0;
    }
    let norm = (c * h * w) as f64;
    let mut dys = Vec::with_capacity(c * (h - 1) * w);
    for y in 0..h - 1 {
        for x in 0..w {
            for ch in 0..c {
                dys.push(img.pixel(x, y + 1, ch) - img.pixel(x, y, ch));
            }
        }
    }
    let mean_abs = dys.iter().map(|d| d.abs()).sum::<f64>() / dys.len() as f64;
    let mean_dy = dys.iter().sum::<f64>() / dys.len() as f64;
    let mean_dev = dys.iter().map(|d| (d - mean_dy).abs()).sum::<f64>() / dys.len() as f64;
    -mean_abs / norm + mean_dev / norm
}

/// All four metrics in one record, as emitted by the analysis report.
#[derive(Debug, Clone, Serialize)]
pub struct StyleMetrics {
    pub tv_loss: f64,
    pub texture_loss: f64,
    pub drip_loss: f64,
    /// Gram matrix of the image treated as a C-channel feature map.
    pub gram: Vec<f64>,
    pub gram_channels: usize,
}

pub fn style_metrics(img: &RasterImage) -> StyleMetrics {
    let spatial = img.width * img.height;
    // Deinterleave so the Gram rows are whole channels.
    let mut planar = vec![0.0; img.data.len()];
    for y in 0..img.height {
        for x in 0..img.width {
            for c in 0..img.channels {
                planar[c * spatial + y * img.width + x] = img.pixel(x, y, c);
            }
        }
    }
    StyleMetrics {
        tv_loss: tv_loss(img),
        texture_loss: texture_loss(img),
        drip_loss: drip_loss(img),
        gram: gram_matrix(&planar, img.channels, spatial),
        gram_channels: img.channels,
    }
}
