//! Generalized Renyi dimensions and the singularity spectrum obtained from
//! the mass exponents by Legendre transform.

use serde::Serialize;

use crate::boxcount::BoxMassGrid;
use crate::error::{CoreError, Result};
use crate::regression::ols;

/// Moment orders, generalized dimensions, and mass exponents.
#[derive(Debug, Clone, Serialize)]
pub struct RenyiSpectrum {
    pub q: Vec<f64>,
    pub d_q: Vec<f64>,
    /// tau(q) = (q - 1) D_q.
    pub tau_q: Vec<f64>,
    /// Information dimension D_1 from the limit form (sum p ln p fit),
    /// reported separately because the moment formula is singular at q = 1.
    pub d1: f64,
    /// Per-q r-squared of the log-log fits.
    pub r_squared: Vec<f64>,
}

/// Default moment grid: 40 uniform points over [-5, 5]. The spacing 10/39
/// never lands on q = 1, where the moment formula degenerates.
pub fn default_q_grid() -> Vec<f64> {
    (0..40).map(|i| -5.0 + i as f64 * (10.0 / 39.0)).collect()
}

/// Fit `log sum p_i^q` against `log eps` per moment order.
///
/// Every mass grid must be normalized to 1e-6; q values within 1e-6 of 1
/// are rejected (the information dimension is computed separately and
/// reported in `d1`).
pub fn renyi_spectrum(measures: &[BoxMassGrid], q_grid: &[f64]) -> Result<RenyiSpectrum> {
    if measures.len() < 2 {
        return Err(CoreError::GridTooSmall(format!(
            "need at least 2 scales, got {}",
            measures.len()
        )));
    }
    for m in measures {
        let err = (m.total() - 1.0).abs();
        if err > 1e-6 {
            return Err(CoreError::UnnormalizedMeasure(err));
        }
    }
    if let Some(&bad) = q_grid.iter().find(|q| (**q - 1.0).abs() <= 1e-6) {
        return Err(CoreError::QNearUnity(bad));
    }

    let log_eps: Vec<f64> = measures.iter().map(|m| m.scale.ln()).collect();
    let mut d_q = Vec::with_capacity(q_grid.len());
    let mut tau_q = Vec::with_capacity(q_grid.len());
    let mut r_squared = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let y: Vec<f64> = measures
            .iter()
            .map(|m| m.masses.iter().map(|&p| p.powf(q)).sum::<f64>().ln())
            .collect();
        let fit = ols(&log_eps, &y);
        let tau = fit.slope;
        tau_q.push(tau);
        d_q.push(tau / (q - 1.0));
        r_squared.push(fit.r_squared);
    }

    // D_1 limit form: sum p ln p ~ D_1 ln eps.
    let y1: Vec<f64> = measures
        .iter()
        .map(|m| m.masses.iter().map(|&p| p * p.ln()).sum::<f64>())
        .collect();
    let d1 = ols(&log_eps, &y1).slope;

    Ok(RenyiSpectrum { q: q_grid.to_vec(), d_q, tau_q, d1, r_squared })
}

/// Holder exponents and the singularity spectrum f(alpha).
#[derive(Debug, Clone, Serialize)]
pub struct SingularitySpectrum {
    pub alpha: Vec<f64>,
    pub f_alpha: Vec<f64>,
    /// Spectrum width: alpha_max - alpha_min over the q grid.
    pub width: f64,
}

/// Legendre transform of tau(q) by finite differences: central in the
/// interior, one-sided at the ends. Requires a uniform q grid of at least
/// 7 points.
pub fn singularity_spectrum(spec: &RenyiSpectrum) -> Result<SingularitySpectrum> {
    let n = spec.q.len();
    if n < 7 {
        return Err(CoreError::GridTooSmall(format!("need >= 7 q points, got {n}")));
    }
    let h = spec.q[1] - spec.q[0];
    for w in spec.q.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0) {
            return Err(CoreError::GridTooSmall("q grid is not uniformly spaced".into()));
        }
    }
    let tau = &spec.tau_q;
    let mut alpha = Vec::with_capacity(n);
    for i in 0..n {
        let a = if i == 0 {
            (tau[1] - tau[0]) / h
        } else if i == n - 1 {
            (tau[n - 1] - tau[n - 2]) / h
        } else {
            (tau[i + 1] - tau[i - 1]) / (2.0 * h)
        };
        alpha.push(a);
    }
    let f_alpha: Vec<f64> = (0..n).map(|i| spec.q[i] * alpha[i] - tau[i]).collect();
    let a_min = alpha.iter().cloned().fold(f64::INFINITY, f64::min);
    let a_max = alpha.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SingularitySpectrum { alpha, f_alpha, width: a_max - a_min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxcount::BoxMassGrid;

    /// Uniform measure on a full square at a few dyadic scales.
    fn uniform_measures() -> Vec<BoxMassGrid> {
        [64usize, 32, 16, 8, 4]
            .iter()
            .map(|&eps| {
                let boxes = (256 / eps) * (256 / eps);
                BoxMassGrid { scale: eps as f64, masses: vec![1.0 / boxes as f64; boxes] }
            })
            .collect()
    }

    #[test]
    fn uniform_square_is_two_dimensional_for_all_q() {
        let spec = renyi_spectrum(&uniform_measures(), &default_q_grid()).unwrap();
        for (&q, &d) in spec.q.iter().zip(&spec.d_q) {
            assert!((d - 2.0).abs() <= 0.05, "D_{q} = {d}");
        }
        assert!((spec.d1 - 2.0).abs() <= 0.05);
    }

    #[test]
    fn tau_vanishes_at_origin_neighborhood() {
        // tau(q) = (q-1) D_q, so the reconstruction d_q * (q-1) must match.
        let spec = renyi_spectrum(&uniform_measures(), &default_q_grid()).unwrap();
        for i in 0..spec.q.len() {
            assert!((spec.tau_q[i] - (spec.q[i] - 1.0) * spec.d_q[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_unnormalized_measure() {
        let bad = vec![
            BoxMassGrid { scale: 8.0, masses: vec![0.7, 0.7] },
            BoxMassGrid { scale: 4.0, masses: vec![0.5, 0.5] },
        ];
        assert!(matches!(
            renyi_spectrum(&bad, &[2.0, 3.0]),
            Err(CoreError::UnnormalizedMeasure(_))
        ));
    }

    #[test]
    fn rejects_q_near_one() {
        let m = uniform_measures();
        assert!(matches!(
            renyi_spectrum(&m, &[0.5, 1.0 + 1e-9]),
            Err(CoreError::QNearUnity(_))
        ));
    }

    #[test]
    fn monofractal_collapses_to_a_point() {
        // Linear tau means a constant derivative: the spectrum collapses.
        let spec = renyi_spectrum(&uniform_measures(), &default_q_grid()).unwrap();
        let sing = singularity_spectrum(&spec).unwrap();
        assert!(sing.width <= 0.02, "width {}", sing.width);
        for (&a, &f) in sing.alpha.iter().zip(&sing.f_alpha) {
            assert!((a - 2.0).abs() <= 0.05);
            assert!((f - 2.0).abs() <= 0.05);
        }
    }

    #[test]
    fn grid_too_small_for_legendre() {
        let spec = RenyiSpectrum {
            q: vec![0.0, 0.5, 2.0],
            d_q: vec![1.0; 3],
            tau_q: vec![0.0; 3],
            d1: 1.0,
            r_squared: vec![1.0; 3],
        };
        assert!(matches!(
            singularity_spectrum(&spec),
            Err(CoreError::GridTooSmall(_))
        ));
    }
}
