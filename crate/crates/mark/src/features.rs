//! Multiscale robust feature vector: per-scale wavelet energies, box-count
//! sub-range slopes, and turbulence statistics, z-normalized and uniformly
//! quantized for fingerprinting.

use fractalmark_core::{capacity_dimension, haar_dwt2, ols, CoreError, GrayImage};

use crate::error::Result;

/// Quantized multiscale feature vector: per scale s = 1..=S the level-s
/// wavelet band energies (LH, HL, HH), the box-count slope over the s-th
/// contiguous chunk of the fitted scale range, and the level-s combined
/// power mean/variance. The concatenation is z-normalized by its own
/// mean/std, clipped to [-4, 4], and quantized to `bits` levels.
pub fn multiscale_features(img: &GrayImage, scales: usize, bits: u8) -> Result<Vec<u16>> {
    assert!(scales >= 1);
    assert!((1..=16).contains(&bits));
    let raw = raw_multiscale_features(img, scales)?;
    let n = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let var = raw.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < 1e-12 {
        return Err(CoreError::DegenerateInput("feature vector has no spread".into()).into());
    }
    let levels = (1u32 << bits) - 1;
    Ok(raw
        .iter()
        .map(|v| {
            let z = ((v - mean) / std).clamp(-4.0, 4.0);
            ((z + 4.0) / 8.0 * levels as f64).round() as u16
        })
        .collect())
}

fn raw_multiscale_features(img: &GrayImage, scales: usize) -> Result<Vec<f64>> {
    let capacity = capacity_dimension(img)?;
    let max_levels = {
        let mut l = 0;
        let mut size = img.width.min(img.height);
        while size >= 2 {
            l += 1;
            size /= 2;
        }
        l
    };
    let levels = scales.min(max_levels).max(1);
    let pyr = haar_dwt2(img, levels)?;

    // Chunked slopes over the fitted part of the box-count series.
    let series = &capacity.series;
    let (lo, hi) = series.fit_range;
    let fitted = hi - lo;
    let chunks = scales.min(fitted / 2).max(1);

    let mut features = Vec::with_capacity(scales * 6);
    for s in 0..scales {
        // Wavelet band energies; scales beyond the pyramid repeat the
        // deepest level so the vector length stays fixed.
        let level = &pyr.levels[s.min(pyr.levels.len() - 1)];
        features.push(level.lh.energy());
        features.push(level.hl.energy());
        features.push(level.hh.energy());

        let chunk = s.min(chunks - 1);
        let span = fitted.div_ceil(chunks);
        let c_lo = lo + chunk * span;
        let c_hi = (c_lo + span).min(hi);
        let slope = if c_hi - c_lo >= 2 {
            let x: Vec<f64> = series.scales[c_lo..c_hi].iter().map(|&e| (1.0 / e).ln()).collect();
            let y: Vec<f64> = series.counts[c_lo..c_hi].iter().map(|&c| (c as f64).ln()).collect();
            ols(&x, &y).slope
        } else {
            capacity.dimension
        };
        features.push(slope);

        // Combined high-frequency power stats at this level.
        let l = &pyr.levels[s.min(pyr.levels.len() - 1)];
        let n = l.lh.data.len();
        let mut mean = 0.0;
        for i in 0..n {
            mean += l.lh.data[i] * l.lh.data[i]
                + l.hl.data[i] * l.hl.data[i]
                + l.hh.data[i] * l.hh.data[i];
        }
        mean /= n as f64;
        let mut var = 0.0;
        for i in 0..n {
            let p = l.lh.data[i] * l.lh.data[i]
                + l.hl.data[i] * l.hl.data[i]
                + l.hh.data[i] * l.hh.data[i];
            var += (p - mean) * (p - mean);
        }
        var /= n as f64;
        features.push(mean);
        features.push(var);
    }
    Ok(features)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(n: usize) -> GrayImage {
        let data: Vec<f64> = (0..n * n)
            .map(|i| (((i * 2654435761) % 1000) as f64 / 999.0 * 0.5) + ((i % n) as f64 / n as f64) * 0.5)
            .collect();
        GrayImage::new(n, n, data).unwrap()
    }

    #[test]
    fn constant_image_is_degenerate() {
        let img = GrayImage::filled(64, 64, 0.3).unwrap();
        assert!(multiscale_features(&img, 3, 8).is_err());
    }

    #[test]
    fn one_bit_depth_yields_binary_codes() {
        let feats = multiscale_features(&textured(128), 3, 1).unwrap();
        assert!(feats.iter().all(|&c| c <= 1));
        assert!(feats.contains(&0) && feats.contains(&1));
    }

    #[test]
    fn deterministic_across_runs() {
        let img = textured(128);
        let a = multiscale_features(&img, 3, 8).unwrap();
        let b = multiscale_features(&img, 3, 8).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 18);
    }

    #[test]
    fn codes_fit_bit_depth() {
        let feats = multiscale_features(&textured(96), 2, 8).unwrap();
        assert!(feats.iter().all(|&c| c <= 255));
    }
}
