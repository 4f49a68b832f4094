//! Strength machinery: the texture-adaptive per-block strength map, the
//! capacity bound, the constrained strength search, and the theoretical
//! detection bound.

use rayon::prelude::*;
use serde::Serialize;

use fractalmark_core::{box_count, psnr_gray, scharr_edges, EdgeMap, GrayImage};

use crate::error::Result;
use crate::watermark::{embed_with_strengths, EmbedConfig, WatermarkMatrix};
use crate::chaos::ChaoticBits;

/// Per-block embedding strengths in block raster order.
#[derive(Debug, Clone, Serialize)]
pub struct StrengthMap {
    pub block_cols: usize,
    pub block_rows: usize,
    pub values: Vec<f64>,
}

/// alpha_local = alpha_base * (1 + gamma * (D_local - D_min) / (D_max - D_min)),
/// with D_local box-counted in a k x k window centered on each block.
/// Windows without edges take D_min; a degenerate spread maps everything
/// to alpha_base.
pub fn local_strength(img: &GrayImage, cfg: &EmbedConfig) -> Result<StrengthMap> {
    let block_cols = img.width.div_ceil(cfg.block);
    let block_rows = img.height.div_ceil(cfg.block);
    let k = cfg.local_window;
    let edges = scharr_edges(img, fractalmark_core::DEFAULT_EDGE_THRESHOLD)?;

    let dims: Vec<Option<f64>> = (0..block_rows * block_cols)
        .into_par_iter()
        .map(|bi| {
            let bx = bi % block_cols;
            let by = bi / block_cols;
            let cx = (bx * cfg.block + cfg.block / 2).min(img.width - 1);
            let cy = (by * cfg.block + cfg.block / 2).min(img.height - 1);
            let x0 = cx.saturating_sub(k / 2);
            let y0 = cy.saturating_sub(k / 2);
            let x1 = (x0 + k).min(img.width);
            let y1 = (y0 + k).min(img.height);
            let (w, h) = (x1 - x0, y1 - y0);
            let mut bits = vec![false; w * h];
            for y in 0..h {
                for x in 0..w {
                    bits[y * w + x] = edges.binary[(y0 + y) * img.width + (x0 + x)];
                }
            }
            if bits.iter().all(|&b| !b) {
                return None;
            }
            let mask = EdgeMap::from_binary(w, h, bits).ok()?;
            box_count(&mask, 12).ok().map(|s| s.fit.slope)
        })
        .collect();

    let known: Vec<f64> = dims.iter().flatten().copied().collect();
    let (d_min, d_max) = known.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
        (lo.min(d), hi.max(d))
    });
    let spread = d_max - d_min;
    let values = dims
        .iter()
        .map(|d| {
            if known.is_empty() || spread < 1e-12 {
                cfg.alpha_base
            } else {
                let d = d.unwrap_or(d_min);
                cfg.alpha_base * (1.0 + cfg.gamma * (d - d_min) / spread)
            }
        })
        .collect();
    Ok(StrengthMap { block_cols, block_rows, values })
}

/// Shannon-style bound: C = sum log2(1 + P_signal / P_noise) with the
/// signal power taken as the local variance over non-overlapping 8x8
/// windows and a 1e-12 noise floor.
pub fn capacity_bound(img: &GrayImage, noise_power: &[f64]) -> f64 {
    assert_eq!(noise_power.len(), img.data.len());
    let mut signal = vec![0.0; img.data.len()];
    let tile = 8;
    let mut y0 = 0;
    while y0 < img.height {
        let y1 = (y0 + tile).min(img.height);
        let mut x0 = 0;
        while x0 < img.width {
            let x1 = (x0 + tile).min(img.width);
            let n = ((y1 - y0) * (x1 - x0)) as f64;
            let mut sum = 0.0;
            for y in y0..y1 {
                for x in x0..x1 {
                    sum += img.at(x, y);
                }
            }
            let mean = sum / n;
            let mut var = 0.0;
            for y in y0..y1 {
                for x in x0..x1 {
                    let d = img.at(x, y) - mean;
                    var += d * d;
                }
            }
            var /= n;
            for y in y0..y1 {
                for x in x0..x1 {
                    signal[y * img.width + x] = var;
                }
            }
            x0 = x1;
        }
        y0 = y1;
    }
    signal
        .iter()
        .zip(noise_power)
        .map(|(&s, &p)| (1.0 + s / p.max(1e-12)).log2())
        .sum()
}

/// Largest alpha whose embedding still meets the PSNR floor, by monotone
/// bisection to 1e-4 resolution. PSNR decreases monotonically in alpha, so
/// the feasible set is an interval starting at 0.
pub fn optimize_strength(
    img: &GrayImage,
    watermark: &WatermarkMatrix,
    bits: &ChaoticBits,
    cfg: &EmbedConfig,
    tau_perceptual_db: f64,
) -> Result<f64> {
    cfg.validate()?;
    let base_map = local_strength(img, cfg)?;
    // The map scales linearly with alpha_base; reuse the modulation shape.
    let modulation: Vec<f64> = base_map
        .values
        .iter()
        .map(|v| if cfg.alpha_base > 0.0 { v / cfg.alpha_base } else { 1.0 })
        .collect();
    let psnr_at = |alpha: f64| -> Result<f64> {
        if alpha == 0.0 {
            return Ok(f64::INFINITY);
        }
        let map = StrengthMap {
            block_cols: base_map.block_cols,
            block_rows: base_map.block_rows,
            values: modulation.iter().map(|m| alpha * m).collect(),
        };
        let marked = embed_with_strengths(img, watermark, bits, cfg, &map)?;
        Ok(psnr_gray(img, &marked)?)
    };

    if psnr_at(cfg.alpha_max)? >= tau_perceptual_db {
        return Ok(cfg.alpha_max);
    }
    let mut lo = 0.0;
    let mut hi = cfg.alpha_max;
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if psnr_at(mid)? >= tau_perceptual_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Theoretical detection probability bound: 1 - Q(sqrt(N) * SNR / 2) with
/// Q the standard Gaussian tail.
pub fn detection_bound(n_bits: usize, snr: f64) -> f64 {
    assert!(n_bits >= 1);
    assert!(snr >= 0.0);
    1.0 - q_function((n_bits as f64).sqrt() * snr / 2.0)
}

/// Gaussian upper-tail probability via the complementary error function.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detection_bound_at_zero_snr_is_half() {
        assert!((detection_bound(64, 0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn detection_bound_monotone_in_n() {
        let mut prev = 0.0;
        for n in [1usize, 4, 16, 64, 256, 1024] {
            let b = detection_bound(n, 0.5);
            assert!(b >= prev);
            prev = b;
        }
        assert!(prev > 0.999);
    }

    #[test]
    fn q_function_matches_quadrature_oracle() {
        // Simpson integration of the standard normal density on [x, 40].
        let quad = |x: f64| {
            let (a, b) = (x, 40.0);
            let n = 400_000;
            let h = (b - a) / n as f64;
            let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let mut acc = pdf(a) + pdf(b);
            for i in 1..n {
                let t = a + i as f64 * h;
                acc += pdf(t) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        for x in [0.0, 0.5, 1.0, 2.0] {
            assert!((q_function(x) - quad(x)).abs() < 1e-10, "x = {x}");
        }
        // N = 64, snr = 0.5 pins the bound against the same oracle.
        let expected = 1.0 - quad(64f64.sqrt() * 0.5 / 2.0);
        assert!((detection_bound(64, 0.5) - expected).abs() < 1e-10);
    }

    #[test]
    fn capacity_zero_signal_is_zero() {
        let img = GrayImage::filled(32, 32, 0.5).unwrap();
        let noise = vec![0.01; 32 * 32];
        assert_eq!(capacity_bound(&img, &noise), 0.0);
    }

    #[test]
    fn capacity_equal_powers_is_one_bit_per_pixel() {
        // Checkerboard tiles have constant local variance; feed that back
        // as the noise power so each pixel contributes exactly 1 bit.
        let data: Vec<f64> = (0..32 * 32).map(|i| ((i % 32 + i / 32) % 2) as f64).collect();
        let img = GrayImage::new(32, 32, data).unwrap();
        let var = 0.25; // population variance of a balanced 0/1 tile
        let noise = vec![var; 32 * 32];
        let c = capacity_bound(&img, &noise);
        assert!((c - 1024.0).abs() < 1e-9, "C = {c}");
    }

    #[test]
    fn capacity_matches_direct_sum_oracle() {
        let data: Vec<f64> = (0..64 * 64).map(|i| ((i * 131) % 251) as f64 / 250.0).collect();
        let img = GrayImage::new(64, 64, data).unwrap();
        let noise = vec![0.01; 64 * 64];
        let fast = capacity_bound(&img, &noise);
        // Direct per-pixel summation with independently computed tile stats.
        let mut direct = 0.0;
        for y in 0..64 {
            for x in 0..64 {
                let (ty, tx) = (y / 8 * 8, x / 8 * 8);
                let mut vals = Vec::with_capacity(64);
                for yy in ty..ty + 8 {
                    for xx in tx..tx + 8 {
                        vals.push(img.at(xx, yy));
                    }
                }
                let mean = vals.iter().sum::<f64>() / 64.0;
                let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 64.0;
                direct += (1.0 + var / 0.01).log2();
            }
        }
        assert!((fast - direct).abs() < 1e-9);
    }
}
