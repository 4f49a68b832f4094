//! Orthonormal 2D DCT-II on square blocks.
//!
//! The orthonormal convention makes Parseval exact and keeps embedding
//! strengths directly interpretable in pixel-energy units. Basis matrices
//! are cached per size; for the 8x8 block workload the transform is a pair
//! of small matrix products.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};
use std::sync::Arc;

use crate::error::{CoreError, Result};

/// Square grid of DCT-II coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DctBlock {
    pub size: usize,
    pub coeffs: Vec<f64>,
}

impl DctBlock {
    #[inline]
    pub fn at(&self, u: usize, v: usize) -> f64 {
        self.coeffs[u * self.size + v]
    }

    #[inline]
    pub fn at_mut(&mut self, u: usize, v: usize) -> &mut f64 {
        &mut self.coeffs[u * self.size + v]
    }
}

fn basis(n: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut c = vec![0.0; n * n];
            for k in 0..n {
                let scale = if k == 0 {
                    (1.0 / n as f64).sqrt()
                } else {
                    (2.0 / n as f64).sqrt()
                };
                for j in 0..n {
                    c[k * n + j] = scale
                        * (std::f64::consts::PI * (2.0 * j as f64 + 1.0) * k as f64
                            / (2.0 * n as f64))
                            .cos();
                }
            }
            Arc::new(c)
        })
        .clone()
}

fn check_square(rows: usize, cols: usize) -> Result<usize> {
    if rows != cols || rows < 2 {
        return Err(CoreError::NonSquareBlock { rows, cols });
    }
    Ok(rows)
}

/// Forward orthonormal 2D DCT-II of an `n x n` pixel grid (row-major).
pub fn dct2(pixels: &[f64], rows: usize, cols: usize) -> Result<DctBlock> {
    let n = check_square(rows, cols)?;
    let c = basis(n);
    // Y = C * X * C^T
    let mut tmp = vec![0.0; n * n];
    for k in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += c[k * n + i] * pixels[i * n + j];
            }
            tmp[k * n + j] = acc;
        }
    }
    let mut coeffs = vec![0.0; n * n];
    for k in 0..n {
        for l in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += tmp[k * n + j] * c[l * n + j];
            }
            coeffs[k * n + l] = acc;
        }
    }
    Ok(DctBlock { size: n, coeffs })
}

/// Inverse of [`dct2`]; exact within 1e-9 max-abs.
pub fn idct2(block: &DctBlock) -> Vec<f64> {
    let n = block.size;
    let c = basis(n);
    // X = C^T * Y * C
    let mut tmp = vec![0.0; n * n];
    for i in 0..n {
        for l in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += c[k * n + i] * block.coeffs[k * n + l];
            }
            tmp[i * n + l] = acc;
        }
    }
    let mut pixels = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for l in 0..n {
                acc += tmp[i * n + l] * c[l * n + j];
            }
            pixels[i * n + j] = acc;
        }
    }
    pixels
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force DCT-II straight from the four-term definition; the
    /// independent oracle for the transform path.
    fn dct2_direct(pixels: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                let su = if u == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
                let sv = if v == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
                let mut acc = 0.0;
                for x in 0..n {
                    for y in 0..n {
                        acc += pixels[x * n + y]
                            * (std::f64::consts::PI * (2.0 * x as f64 + 1.0) * u as f64
                                / (2.0 * n as f64))
                                .cos()
                            * (std::f64::consts::PI * (2.0 * y as f64 + 1.0) * v as f64
                                / (2.0 * n as f64))
                                .cos();
                    }
                }
                out[u * n + v] = su * sv * acc;
            }
        }
        out
    }

    #[test]
    fn constant_block_has_only_dc() {
        let n = 8;
        let c = 0.4;
        let block = dct2(&vec![c; n * n], n, n).unwrap();
        assert!((block.at(0, 0) - c * n as f64).abs() < 1e-12);
        for u in 0..n {
            for v in 0..n {
                if (u, v) != (0, 0) {
                    assert!(block.at(u, v).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn matches_direct_summation_oracle() {
        let pixels = [1.0, 0.0, 0.0, 0.0];
        let block = dct2(&pixels, 2, 2).unwrap();
        let oracle = dct2_direct(&pixels, 2);
        for (a, b) in block.coeffs.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pixels: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..1.0)).collect();
        let block = dct2(&pixels, 8, 8).unwrap();
        let oracle = dct2_direct(&pixels, 8);
        for (a, b) in block.coeffs.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn roundtrip_random_8x8() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pixels: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..1.0)).collect();
        let back = idct2(&dct2(&pixels, 8, 8).unwrap());
        for (a, b) in pixels.iter().zip(&back) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..1.0)).collect();
        let y: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..1.0)).collect();
        let (a, b) = (0.7, -1.3);
        let combo: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| a * xi + b * yi).collect();
        let lhs = dct2(&combo, 8, 8).unwrap();
        let dx = dct2(&x, 8, 8).unwrap();
        let dy = dct2(&y, 8, 8).unwrap();
        for i in 0..64 {
            assert!((lhs.coeffs[i] - (a * dx.coeffs[i] + b * dy.coeffs[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            dct2(&[0.0; 6], 2, 3),
            Err(CoreError::NonSquareBlock { .. })
        ));
    }
}
