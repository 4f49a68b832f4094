//! Log-log regression helpers for the scaling fits.

use serde::Serialize;

/// Ordinary least-squares line with its coefficient of determination.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct FitLine {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// OLS fit of `y` on `x`. A perfectly flat `y` fits exactly, so its
/// r-squared is reported as 1.
pub fn ols(x: &[f64], y: &[f64]) -> FitLine {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    if sxx == 0.0 {
        return FitLine { slope: 0.0, intercept: my, r_squared: 1.0 };
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    FitLine { slope, intercept, r_squared }
}

/// Theil-Sen slope: the median of all pairwise slopes. Used as a robust
/// diagnostic next to the OLS fit.
pub fn theil_sen_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let mut slopes = Vec::with_capacity(x.len() * (x.len() - 1) / 2);
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            if x[j] != x[i] {
                slopes.push((y[j] - y[i]) / (x[j] - x[i]));
            }
        }
    }
    if slopes.is_empty() {
        return 0.0;
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = slopes.len();
    if m % 2 == 1 {
        slopes[m / 2]
    } else {
        0.5 * (slopes[m / 2 - 1] + slopes[m / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let fit = ols(&x, &y);
        assert!((fit.slope - 2.5).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ols_flat_series_has_zero_slope() {
        let x = [1.0, 2.0, 3.0];
        let y = [5.0, 5.0, 5.0];
        let fit = ols(&x, &y);
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn theil_sen_ignores_one_outlier() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let mut y: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        y[2] = 100.0;
        assert!((theil_sen_slope(&x, &y) - 3.0).abs() < 1e-9);
    }
}
