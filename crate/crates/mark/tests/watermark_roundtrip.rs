//! End-to-end oracles for the feature watermark: no-attack round trip,
//! strength search vs dense grid, local-strength contrast, and the
//! theoretical detection bound against Monte Carlo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fractalmark_core::{psnr_gray, GrayImage};
use fractalmark_mark::*;

/// Sparse high-contrast strokes on a smooth wash; the texture family the
/// watermark features are designed around.
fn drip_texture(n: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0; n * n];
    // Smooth background wash from a coarse random grid, bilinearly upsampled.
    let coarse = 8usize;
    let grid: Vec<f64> = (0..(coarse + 1) * (coarse + 1))
        .map(|_| rng.random_range(0.35..0.65))
        .collect();
    for y in 0..n {
        for x in 0..n {
            let gx = x as f64 / n as f64 * coarse as f64;
            let gy = y as f64 / n as f64 * coarse as f64;
            let (x0, y0) = (gx.floor() as usize, gy.floor() as usize);
            let (fx, fy) = (gx - x0 as f64, gy - y0 as f64);
            let g = |xx: usize, yy: usize| grid[yy.min(coarse) * (coarse + 1) + xx.min(coarse)];
            data[y * n + x] = (g(x0, y0) * (1.0 - fx) + g(x0 + 1, y0) * fx) * (1.0 - fy)
                + (g(x0, y0 + 1) * (1.0 - fx) + g(x0 + 1, y0 + 1) * fx) * fy;
        }
    }
    // Drip strokes: vertically biased random walks with high contrast.
    let strokes = n / 4;
    for _ in 0..strokes {
        let mut x = rng.random_range(0.0..n as f64);
        let mut y = rng.random_range(0.0..n as f64);
        let mut dir: f64 = rng.random_range(-0.6..0.6);
        let ink = if rng.random_range(0.0..1.0) < 0.5 { 0.02 } else { 0.98 };
        let len = rng.random_range(n / 4..n);
        for _ in 0..len {
            dir += rng.random_range(-0.25..0.25);
            dir = dir.clamp(-1.2, 1.2);
            x += dir.sin();
            y += 1.0 + 0.2 * dir.cos();
            if x < 1.0 || y < 1.0 || x >= (n - 1) as f64 || y >= (n - 1) as f64 {
                break;
            }
            let (xi, yi) = (x as usize, y as usize);
            data[yi * n + xi] = ink;
            if rng.random_range(0.0..1.0) < 0.3 {
                data[yi * n + xi + 1] = ink;
            }
        }
    }
    GrayImage::new(n, n, data).unwrap()
}

#[test]
fn no_attack_roundtrip_detects_with_high_correlation() {
    for seed in [1u64, 2, 3] {
        let img = drip_texture(256, seed);
        let cfg = EmbedConfig::default();
        let w = build_watermark(&img).unwrap();
        let bits = embedding_bits(&cfg, 32 * 32).unwrap();
        let (marked, receipt) = embed(&img, &w, &bits, &cfg).unwrap();

        let db = psnr_gray(&img, &marked).unwrap();
        assert!(db >= 40.0, "seed {seed}: psnr {db}");

        let extracted = extract(&marked, &receipt, &cfg).unwrap();
        let res = detect(&w, &extracted, cfg.threshold);
        assert!(res.r >= 0.999, "seed {seed}: r = {}", res.r);
        assert!(res.detected);

        // Feature drift stays within 2% per entry.
        assert!((extracted.d - w.d).abs() / w.d <= 0.02, "d drift");
        assert!((extracted.mu - w.mu).abs() / w.mu <= 0.02, "mu drift");
        assert!((extracted.sigma - w.sigma).abs() / w.sigma <= 0.02, "sigma drift");
    }
}

#[test]
fn zero_alpha_embedding_is_transparent() {
    let img = drip_texture(128, 4);
    let cfg = EmbedConfig { alpha_base: 0.0, ..EmbedConfig::default() };
    let w = build_watermark(&img).unwrap();
    let bits = embedding_bits(&cfg, 16 * 16).unwrap();
    let (marked, _) = embed(&img, &w, &bits, &cfg).unwrap();
    let max_err = img
        .data
        .iter()
        .zip(&marked.data)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(max_err <= 1.0 / 255.0, "max err {max_err}");
}

#[test]
fn psnr_strictly_decreases_with_alpha() {
    let img = drip_texture(192, 5);
    let w = build_watermark(&img).unwrap();
    let mut prev = f64::INFINITY;
    for step in 1..=4 {
        let cfg = EmbedConfig { alpha_base: step as f64 * 2.0 / 255.0, ..EmbedConfig::default() };
        let bits = embedding_bits(&cfg, 24 * 24).unwrap();
        let (marked, _) = embed(&img, &w, &bits, &cfg).unwrap();
        let db = psnr_gray(&img, &marked).unwrap();
        assert!(db < prev, "alpha step {step}: {db} !< {prev}");
        prev = db;
    }
}

#[test]
fn extract_rejects_mismatched_receipt() {
    let img = drip_texture(128, 6);
    let cfg = EmbedConfig::default();
    let w = build_watermark(&img).unwrap();
    let bits = embedding_bits(&cfg, 16 * 16).unwrap();
    let (marked, receipt) = embed(&img, &w, &bits, &cfg).unwrap();
    let mut other = cfg.clone();
    other.gamma = 1.5;
    assert!(matches!(
        extract(&marked, &receipt, &other),
        Err(MarkError::ReceiptMismatch)
    ));
}

#[test]
fn gamma_zero_gives_flat_strength_map() {
    let img = drip_texture(128, 7);
    let cfg = EmbedConfig { gamma: 0.0, ..EmbedConfig::default() };
    let map = local_strength(&img, &cfg).unwrap();
    assert!(map.values.iter().all(|&v| (v - cfg.alpha_base).abs() < 1e-12));
}

#[test]
fn textured_half_gets_stronger_embedding_than_smooth_half() {
    // Left half: dense noise texture; right half: constant. The noisy side
    // must receive strictly larger strengths.
    let n = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut data = vec![0.45; n * n];
    for y in 0..n {
        for x in 0..n / 2 {
            data[y * n + x] = rng.random_range(0.0..1.0);
        }
    }
    let img = GrayImage::new(n, n, data).unwrap();
    let cfg = EmbedConfig::default();
    let map = local_strength(&img, &cfg).unwrap();
    let cols = map.block_cols;
    let mut noisy_min = f64::INFINITY;
    let mut smooth_max: f64 = 0.0;
    for (i, &v) in map.values.iter().enumerate() {
        let bx = i % cols;
        // Stay clear of the seam, where windows straddle both halves.
        if bx + 4 < cols / 2 {
            noisy_min = noisy_min.min(v);
        } else if bx > cols / 2 + 4 {
            smooth_max = smooth_max.max(v);
        }
    }
    assert!(
        noisy_min > smooth_max,
        "noisy min {noisy_min} vs smooth max {smooth_max}"
    );
}

#[test]
fn optimize_strength_matches_dense_grid_search() {
    let img = drip_texture(64, 9);
    let cfg = EmbedConfig::default();
    let w = build_watermark(&img).unwrap();
    let bits = embedding_bits(&cfg, 8 * 8).unwrap();
    let tau = 40.0;
    let alpha_star = optimize_strength(&img, &w, &bits, &cfg, tau).unwrap();

    // Dense grid over 10^4 alpha values, each a full embed + PSNR check.
    let mut best = 0.0;
    let steps = 10_000;
    for i in 0..=steps {
        let alpha = cfg.alpha_max * i as f64 / steps as f64;
        let mut c = cfg.clone();
        c.alpha_base = alpha;
        let (marked, _) = embed(&img, &w, &bits, &c).unwrap();
        if psnr_gray(&img, &marked).unwrap() >= tau {
            best = alpha;
        } else {
            break;
        }
    }
    assert!(
        (alpha_star - best).abs() <= 1e-3,
        "bisection {alpha_star} vs grid {best}"
    );
}

#[test]
fn optimize_strength_degenerate_taus() {
    let img = drip_texture(64, 10);
    let cfg = EmbedConfig::default();
    let w = build_watermark(&img).unwrap();
    let bits = embedding_bits(&cfg, 8 * 8).unwrap();
    // Unreachable floor: only the zero embedding is lossless.
    let a = optimize_strength(&img, &w, &bits, &cfg, f64::INFINITY).unwrap();
    assert!(a <= 1e-4, "alpha {a}");
    // Trivial floor: the constraint never binds.
    let a = optimize_strength(&img, &w, &bits, &cfg, 0.0).unwrap();
    assert_eq!(a, cfg.alpha_max);
}

#[test]
fn embedding_deterministic_across_thread_counts() {
    let img = drip_texture(128, 11);
    let cfg = EmbedConfig::default();
    let w = build_watermark(&img).unwrap();
    let bits = embedding_bits(&cfg, 16 * 16).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let (marked, receipt) = embed(&img, &w, &bits, &cfg).unwrap();
            (marked.data, receipt.strength_digest)
        })
    };
    let (img1, digest1) = run(1);
    let (img8, digest8) = run(8);
    assert_eq!(img1, img8);
    assert_eq!(digest1, digest8);
}

#[test]
fn multiscale_features_stable_across_thread_counts() {
    let img = drip_texture(128, 12);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| multiscale_features(&img, 3, 8).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn detection_bound_holds_in_monte_carlo_smoke() {
    // Reduced-trial version of the persistence-bound check; the acceptance
    // suite runs the full 1e5-trial grid.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for &n in &[16usize, 64] {
        for &snr in &[0.5f64, 1.0] {
            let sigma = 1.0 / snr.sqrt();
            let tau = 1.0 - snr.sqrt() / 2.0;
            let trials = 20_000;
            let mut hits = 0usize;
            for _ in 0..trials {
                let mut stat = 0.0;
                for _ in 0..n {
                    let noise: f64 = rand_distr::Distribution::sample(
                        &rand_distr::Normal::new(0.0, sigma).unwrap(),
                        &mut rng,
                    );
                    stat += 1.0 + noise;
                }
                if stat / n as f64 > tau {
                    hits += 1;
                }
            }
            let empirical = hits as f64 / trials as f64;
            let bound = detection_bound(n, snr);
            assert!(
                empirical >= bound - 0.01,
                "N={n} snr={snr}: empirical {empirical} < bound {bound} - 0.01"
            );
        }
    }
}
