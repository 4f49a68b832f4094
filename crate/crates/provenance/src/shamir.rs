//! (k, n) threshold sharing over a prime field: random degree-(k-1)
//! polynomial with the secret as constant term, shares at x = 1..n,
//! reconstruction by Lagrange interpolation at zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ProvenanceError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShamirShares {
    pub prime: u64,
    pub threshold: usize,
    pub shares: Vec<(u64, u64)>,
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // p prime, a != 0 mod p.
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller-Rabin, exact for all u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn eval_poly(coeffs: &[u64], x: u64, p: u64) -> u64 {
    // Horner, highest degree first.
    let mut acc = 0u64;
    for &c in coeffs.iter().rev() {
        acc = add_mod(mul_mod(acc, x, p), c, p);
    }
    acc
}

/// Split with explicit polynomial coefficients `[secret, a_1, ..., a_{k-1}]`;
/// the seeded entry point below draws them at random.
pub fn split_with_coefficients(coeffs: &[u64], n: usize, p: u64) -> Result<ShamirShares> {
    let k = coeffs.len();
    if !is_prime(p) {
        return Err(ProvenanceError::NotPrime(p));
    }
    if k == 0 || k > n || (n as u64) >= p {
        return Err(ProvenanceError::InvalidShares(format!(
            "need 1 <= k <= n < p, got k={k} n={n} p={p}"
        )));
    }
    if coeffs.iter().any(|&c| c >= p) {
        return Err(ProvenanceError::InvalidShares("coefficient >= p".into()));
    }
    let shares = (1..=n as u64).map(|x| (x, eval_poly(coeffs, x, p))).collect();
    Ok(ShamirShares { prime: p, threshold: k, shares })
}

pub fn split(secret: u64, k: usize, n: usize, p: u64, seed: u64) -> Result<ShamirShares> {
    if !is_prime(p) {
        return Err(ProvenanceError::NotPrime(p));
    }
    if secret >= p {
        return Err(ProvenanceError::InvalidShares(format!("secret {secret} >= p {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![secret];
    for _ in 1..k {
        coeffs.push(rng.random_range(0..p));
    }
    split_with_coefficients(&coeffs, n, p)
}

/// Lagrange interpolation at x = 0 from any k distinct shares.
pub fn reconstruct(shares: &[(u64, u64)], k: usize, p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(ProvenanceError::NotPrime(p));
    }
    if shares.len() < k {
        return Err(ProvenanceError::TooFewShares { k, got: shares.len() });
    }
    let pts = &shares[..k];
    let mut secret = 0u64;
    for (i, &(xi, yi)) in pts.iter().enumerate() {
        let mut num = 1u64;
        let mut den = 1u64;
        for (j, &(xj, _)) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            num = mul_mod(num, xj % p, p);
            let diff = (xj % p + p - xi % p) % p;
            if diff == 0 {
                return Err(ProvenanceError::InvalidShares("duplicate share index".into()));
            }
            den = mul_mod(den, diff, p);
        }
        let term = mul_mod(yi % p, mul_mod(num, inv_mod(den, p), p), p);
        secret = add_mod(secret, term, p);
    }
    Ok(secret)
}
