//! Statistics for the method comparisons: Welch's unequal-variance t,
//! normal-approximation p-values, Cohen's d, and Wilson intervals.

use serde::Serialize;

use crate::error::{EvalError, Result};

/// Two-sided Welch comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WelchResult {
    pub t: f64,
    /// Two-sided p via the normal approximation, floored at 1e-12 (the
    /// documented accuracy limit of the approximation).
    pub p: f64,
    /// Cohen's d with pooled std (1e-9 floor, magnitude capped at 100).
    pub d: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

pub fn welch(a: &[f64], b: &[f64]) -> Result<WelchResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(EvalError::InsufficientSamples(a.len(), b.len()));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let se = (va / a.len() as f64 + vb / b.len() as f64).sqrt();
    let diff = ma - mb;
    let t = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * 1e9
    };
    let p = (2.0 * normal_sf(t.abs())).clamp(1e-12, 1.0);

    let pooled = (((a.len() - 1) as f64 * va + (b.len() - 1) as f64 * vb)
        / (a.len() + b.len() - 2) as f64)
        .sqrt();
    let d = (diff / pooled.max(1e-9)).clamp(-100.0, 100.0);
    Ok(WelchResult { t, p, d, mean_a: ma, mean_b: mb })
}

/// Standard normal survival function.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// 95% Wilson score interval.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_null_result() {
        let xs = vec![0.5; 30];
        let res = welch(&xs, &xs).unwrap();
        assert_eq!(res.t, 0.0);
        assert_eq!(res.d, 0.0);
        assert_eq!(res.p, 1.0);
    }

    #[test]
    fn zero_variance_separation_caps_d() {
        let ones = vec![1.0; 30];
        let zeros = vec![0.0; 30];
        let res = welch(&ones, &zeros).unwrap();
        assert_eq!(res.d, 100.0);
        assert!(res.p <= 1e-12 + f64::EPSILON);
    }

    #[test]
    fn five_element_hand_fixture() {
        // a = [2,4,4,4,6]: mean 4, sample variance 2.
        // b = [1,2,3,4,5]: mean 3, sample variance 2.5.
        // t = 1 / sqrt(2/5 + 2.5/5) = 1 / sqrt(0.9)
        // d = 1 / sqrt((4*2 + 4*2.5) / 8) = 1 / 1.5
        let a = [2.0, 4.0, 4.0, 4.0, 6.0];
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        let res = welch(&a, &b).unwrap();
        assert!((res.t - 1.0 / 0.9f64.sqrt()).abs() < 1e-9, "t = {}", res.t);
        assert!((res.d - 1.0 / 1.5).abs() < 1e-9, "d = {}", res.d);
    }

    #[test]
    fn wilson_contains_point_estimate() {
        for (s, n) in [(0usize, 10usize), (5, 10), (10, 10), (190, 200)] {
            let (lo, hi) = wilson_interval(s, n);
            let p = s as f64 / n as f64;
            assert!(lo <= p + 1e-12 && p <= hi + 1e-12, "{s}/{n}: [{lo}, {hi}]");
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }
}
