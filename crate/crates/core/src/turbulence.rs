//! Haar-DWT turbulence power spectrum and sub-band statistics.
//!
//! The watermark features come from the level-1 sub-bands only; deeper
//! levels are kept as diagnostics. Internally everything is computed on
//! [0, 1] intensities; the 8-bit convention values (x255^2 for powers)
//! are carried alongside for metadata comparability.

use serde::Serialize;

use crate::dwt::{haar_dwt2, DwtPyramid, Grid};
use crate::error::Result;
use crate::image::GrayImage;

/// Elementwise squared coefficients of every sub-band.
#[derive(Debug, Clone)]
pub struct PowerPyramid {
    /// Per level: (LH power, HL power, HH power).
    pub levels: Vec<(Grid, Grid, Grid)>,
    pub ll: Grid,
}

/// P = |W|^2 on each sub-band at each level.
pub fn power_spectrum(pyr: &DwtPyramid) -> PowerPyramid {
    let square = |g: &Grid| Grid {
        rows: g.rows,
        cols: g.cols,
        data: g.data.iter().map(|v| v * v).collect(),
    };
    PowerPyramid {
        levels: pyr
            .levels
            .iter()
            .map(|l| (square(&l.lh), square(&l.hl), square(&l.hh)))
            .collect(),
        ll: square(&pyr.ll),
    }
}

const U8_POWER_SCALE: f64 = 255.0 * 255.0;

/// Per-level energy of the three detail bands.
#[derive(Debug, Clone, Serialize)]
pub struct LevelEnergy {
    pub level: usize,
    pub lh: f64,
    pub hl: f64,
    pub hh: f64,
}

/// Mean and variance of the combined level-1 high-frequency power, plus the
/// per-level energy breakdown.
#[derive(Debug, Clone, Serialize)]
pub struct TurbulenceFeatures {
    /// mu: mean of LH^2 + HL^2 + HH^2 at level 1, [0, 1] intensity units.
    pub mean_power: f64,
    /// Population variance of the same grid.
    pub var_power: f64,
    /// sqrt(var_power): spread of the power grid in the same units as mu.
    pub std_power: f64,
    /// mu in the 0-255 intensity convention (x255^2).
    pub mean_power_u8: f64,
    /// Power spread in the 0-255 convention (x255^2), commensurate with
    /// `mean_power_u8`.
    pub std_power_u8: f64,
    /// var_power in the 0-255 convention (x255^4).
    pub var_power_u8: f64,
    pub level_energies: Vec<LevelEnergy>,
}

/// Decompose with `levels` and reduce the level-1 combined high-frequency
/// power grid to its mean and population variance.
pub fn turbulence_stats(img: &GrayImage, levels: usize) -> Result<TurbulenceFeatures> {
    let pyr = haar_dwt2(img, levels)?;
    Ok(turbulence_stats_from_pyramid(&pyr))
}

pub fn turbulence_stats_from_pyramid(pyr: &DwtPyramid) -> TurbulenceFeatures {
    let l1 = &pyr.levels[0];
    let n = l1.lh.data.len();
    let mut combined = Vec::with_capacity(n);
    for i in 0..n {
        let p = l1.lh.data[i] * l1.lh.data[i]
            + l1.hl.data[i] * l1.hl.data[i]
            + l1.hh.data[i] * l1.hh.data[i];
        combined.push(p);
    }
    let mean = combined.iter().sum::<f64>() / n as f64;
    let var = combined.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n as f64;
    let level_energies = pyr
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| LevelEnergy {
            level: i + 1,
            lh: l.lh.energy(),
            hl: l.hl.energy(),
            hh: l.hh.energy(),
        })
        .collect();
    TurbulenceFeatures {
        mean_power: mean,
        var_power: var,
        std_power: var.sqrt(),
        mean_power_u8: mean * U8_POWER_SCALE,
        std_power_u8: var.sqrt() * U8_POWER_SCALE,
        var_power_u8: var * U8_POWER_SCALE * U8_POWER_SCALE,
        level_energies,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_zero_turbulence() {
        let img = GrayImage::filled(32, 32, 0.4).unwrap();
        let t = turbulence_stats(&img, 1).unwrap();
        assert_eq!(t.mean_power, 0.0);
        assert_eq!(t.var_power, 0.0);
    }

    #[test]
    fn checkerboard_energy_lands_in_hh() {
        // Period-2 checkerboard, amplitude 1: per 2x2 tile the Haar detail is
        // entirely diagonal, with hh = (a - b - c + d)/2 = +-2, power 4.
        let mut data = vec![0.0; 16 * 16];
        for y in 0..16 {
            for x in 0..16 {
                data[y * 16 + x] = ((x + y) % 2) as f64;
            }
        }
        let img = GrayImage::new(16, 16, data).unwrap();
        let pyr = haar_dwt2(&img, 1).unwrap();
        assert!(pyr.levels[0].lh.energy() < 1e-18);
        assert!(pyr.levels[0].hl.energy() < 1e-18);
        let t = turbulence_stats(&img, 1).unwrap();
        assert!((t.mean_power - 1.0).abs() < 1e-12, "hh = +-1, power 1");
        assert!(t.var_power < 1e-18);
    }

    #[test]
    fn generic_texture_has_positive_turbulence() {
        let data: Vec<f64> = (0..32 * 32).map(|i| ((i * 37) % 101) as f64 / 100.0).collect();
        let img = GrayImage::new(32, 32, data).unwrap();
        let t = turbulence_stats(&img, 1).unwrap();
        assert!(t.mean_power > 0.0);
    }

    #[test]
    fn power_grids_are_nonnegative() {
        let data: Vec<f64> = (0..32 * 32).map(|i| ((i * 97) % 53) as f64 / 52.0).collect();
        let img = GrayImage::new(32, 32, data).unwrap();
        let pyr = haar_dwt2(&img, 3).unwrap();
        let power = power_spectrum(&pyr);
        for (lh, hl, hh) in &power.levels {
            assert!(lh.data.iter().all(|&v| v >= 0.0));
            assert!(hl.data.iter().all(|&v| v >= 0.0));
            assert!(hh.data.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn intensity_scaling_is_quadratic_in_mu_quartic_in_var() {
        let data: Vec<f64> = (0..32 * 32).map(|i| ((i * 31) % 40) as f64 / 39.0).collect();
        let img = GrayImage::new(32, 32, data.clone()).unwrap();
        let half = GrayImage::new(32, 32, data.iter().map(|v| v * 0.5).collect()).unwrap();
        let a = turbulence_stats(&img, 1).unwrap();
        let b = turbulence_stats(&half, 1).unwrap();
        assert!((b.mean_power - a.mean_power * 0.25).abs() < 1e-12);
        assert!((b.var_power - a.var_power * 0.0625).abs() < 1e-12);
    }

    #[test]
    fn even_translation_invariance() {
        let data: Vec<f64> = (0..64 * 64).map(|i| ((i * 193) % 29) as f64 / 28.0).collect();
        let img = GrayImage::new(64, 64, data.clone()).unwrap();
        // Shift by (2, 2) with wraparound to stay on the Haar period-2 grid.
        let mut shifted = vec![0.0; 64 * 64];
        for y in 0..64 {
            for x in 0..64 {
                shifted[y * 64 + x] = data[((y + 2) % 64) * 64 + (x + 2) % 64];
            }
        }
        let img2 = GrayImage::new(64, 64, shifted).unwrap();
        let a = turbulence_stats(&img, 1).unwrap();
        let b = turbulence_stats(&img2, 1).unwrap();
        assert!((a.mean_power - b.mean_power).abs() < 1e-9);
        assert!((a.var_power - b.var_power).abs() < 1e-9);
    }

    #[test]
    fn level_energies_sum_to_total_high_frequency_energy() {
        let data: Vec<f64> = (0..64 * 64).map(|i| ((i * 7919) % 101) as f64 / 100.0).collect();
        let img = GrayImage::new(64, 64, data).unwrap();
        let pyr = haar_dwt2(&img, 3).unwrap();
        let t = turbulence_stats_from_pyramid(&pyr);
        let per_level_sum: f64 = t.level_energies.iter().map(|l| l.lh + l.hl + l.hh).sum();
        let direct: f64 = pyr
            .levels
            .iter()
            .map(|l| l.lh.energy() + l.hl.energy() + l.hh.energy())
            .sum();
        assert!((per_level_sum - direct).abs() / direct.max(1e-300) < 1e-9);
    }
}
