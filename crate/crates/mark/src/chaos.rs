//! Lorenz-driven chaotic bit generation.
//!
//! The trajectory is integrated with fixed-step RK4 in a fixed evaluation
//! order, so the bit sequence is bit-stable across platforms for a given
//! config. Bits come from a strict median split of the sampled x values
//! with exact balance: the floor(n/2) largest samples map to 1, ties broken
//! by time index.

use serde::{Deserialize, Serialize};

use crate::error::{MarkError, Result};

/// Lorenz system parameters plus the sampling schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorenzConfig {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
    /// RK4 step, in (0, 0.05].
    pub dt: f64,
    /// Steps discarded before sampling, at least 100.
    pub burn_in: usize,
    /// Keep every `sample_stride`-th step after burn-in.
    pub sample_stride: usize,
}

impl Default for LorenzConfig {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            x0: 1.0,
            y0: 1.0,
            z0: 1.0,
            dt: 0.01,
            burn_in: 1000,
            sample_stride: 30,
        }
    }
}

impl LorenzConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.05) {
            return Err(MarkError::InvalidConfig(format!("dt {} outside (0, 0.05]", self.dt)));
        }
        if self.burn_in < 100 {
            return Err(MarkError::InvalidConfig(format!("burn_in {} < 100", self.burn_in)));
        }
        if self.sample_stride == 0 {
            return Err(MarkError::InvalidConfig("sample_stride must be >= 1".into()));
        }
        Ok(())
    }
}

/// Balanced chaotic bit sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaoticBits {
    pub bits: Vec<u8>,
    /// Number of trajectory samples the bits were drawn from.
    pub sample_count: usize,
}

impl ChaoticBits {
    #[inline]
    pub fn sign(&self, index: usize) -> f64 {
        if self.bits[index % self.bits.len()] == 1 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn hamming(&self, other: &ChaoticBits) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }
}

#[inline]
fn derivative(cfg: &LorenzConfig, s: [f64; 3]) -> [f64; 3] {
    [
        cfg.sigma * (s[1] - s[0]),
        s[0] * (cfg.rho - s[2]) - s[1],
        s[0] * s[1] - cfg.beta * s[2],
    ]
}

#[inline]
fn rk4_step(cfg: &LorenzConfig, s: [f64; 3]) -> [f64; 3] {
    let dt = cfg.dt;
    let k1 = derivative(cfg, s);
    let k2 = derivative(cfg, [s[0] + 0.5 * dt * k1[0], s[1] + 0.5 * dt * k1[1], s[2] + 0.5 * dt * k1[2]]);
    let k3 = derivative(cfg, [s[0] + 0.5 * dt * k2[0], s[1] + 0.5 * dt * k2[1], s[2] + 0.5 * dt * k2[2]]);
    let k4 = derivative(cfg, [s[0] + dt * k3[0], s[1] + dt * k3[1], s[2] + dt * k3[2]]);
    [
        s[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        s[2] + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Integrate, discard the burn-in, sample x, and split at the median.
/// The ones-count is exactly floor(n/2) for every n.
pub fn lorenz_bits(cfg: &LorenzConfig, n: usize) -> Result<ChaoticBits> {
    cfg.validate()?;
    if n < 8 {
        return Err(MarkError::InvalidConfig(format!("need n >= 8 bits, got {n}")));
    }
    let mut state = [cfg.x0, cfg.y0, cfg.z0];
    for _ in 0..cfg.burn_in {
        state = rk4_step(cfg, state);
    }
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..cfg.sample_stride {
            state = rk4_step(cfg, state);
        }
        samples.push(state[0]);
    }
    // Strict median split with deterministic tie-breaking: the floor(n/2)
    // largest samples become 1 (ties resolve to 0 via the index order).
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        samples[b]
            .partial_cmp(&samples[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut bits = vec![0u8; n];
    for &idx in order.iter().take(n / 2) {
        bits[idx] = 1;
    }
    Ok(ChaoticBits { bits, sample_count: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_count_is_exactly_half_floor() {
        for n in [8usize, 9, 64, 101, 1024] {
            let bits = lorenz_bits(&LorenzConfig::default(), n).unwrap();
            assert_eq!(bits.ones(), n / 2, "n = {n}");
        }
    }

    #[test]
    fn deterministic_for_fixed_config() {
        let cfg = LorenzConfig::default();
        let a = lorenz_bits(&cfg, 256).unwrap();
        let b = lorenz_bits(&cfg, 256).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sensitive_to_initial_conditions() {
        // A 1e-9 nudge must decorrelate the sequence after the burn-in.
        let cfg = LorenzConfig::default();
        let mut nudged = cfg.clone();
        nudged.x0 += 1e-9;
        let a = lorenz_bits(&cfg, 1024).unwrap();
        let b = lorenz_bits(&nudged, 1024).unwrap();
        let distance = a.hamming(&b);
        assert!(
            distance >= (0.4 * 1024.0) as usize,
            "hamming distance {distance}"
        );
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = LorenzConfig { dt: 0.1, ..LorenzConfig::default() };
        assert!(lorenz_bits(&cfg, 64).is_err());
        let cfg = LorenzConfig { burn_in: 10, ..LorenzConfig::default() };
        assert!(lorenz_bits(&cfg, 64).is_err());
        assert!(lorenz_bits(&LorenzConfig::default(), 4).is_err());
    }
}
