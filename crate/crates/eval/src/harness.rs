//! The robustness harness: embed -> attack -> detect over a corpus for
//! every registered method, plus negative controls, summary statistics,
//! and pairwise comparisons. Fully deterministic for a fixed master seed
//! regardless of thread count: per-cell RNG seeds derive from cell ids,
//! and results assemble in cell order.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fractalmark_core::{psnr_gray, to_gray, GrayImage};
use fractalmark_mark::{
    apply_seeded, baseline_detect, baseline_embed, build_watermark, detect, embed, embedding_bits,
    extract, AttackSpec, BaselineConfig, BaselineKind, EmbedConfig, EmbedReceipt, WatermarkMatrix,
};

use crate::corpus::{drip_image, load_corpus, noise_image};
use crate::error::{EvalError, Result};
use crate::stats::{welch, wilson_interval, WelchResult};

pub const CONFIG_VERSION: &str = "fractalmark-config/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CorpusSpec {
    /// Read images (PNG/JPEG) from a directory, sorted by name.
    Directory { path: PathBuf },
    /// Generate the deterministic drip corpus at this size.
    Synthetic { size: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalConfig {
    pub version: String,
    pub corpus: CorpusSpec,
    /// Method names: "ours", "dct", "lsb", "dwt".
    pub methods: Vec<String>,
    pub attacks: Vec<AttackSpec>,
    pub images: usize,
    pub iterations: usize,
    pub threshold: f64,
    pub master_seed: u64,
    /// Negative-control count per method; defaults to images * iterations.
    pub negative_controls: usize,
}

impl EvalConfig {
    /// 10 images x 20 iterations at 256x256: the desk-scale protocol.
    pub fn desk_preset(master_seed: u64) -> Self {
        Self {
            version: CONFIG_VERSION.to_string(),
            corpus: CorpusSpec::Synthetic { size: 256 },
            methods: vec!["ours".into(), "dct".into(), "lsb".into(), "dwt".into()],
            attacks: AttackSpec::protocol_presets(master_seed),
            images: 10,
            iterations: 20,
            threshold: 0.95,
            master_seed,
            negative_controls: 200,
        }
    }

    /// 50 images x 20 iterations (the published comparison protocol).
    pub fn sec44_preset(master_seed: u64) -> Self {
        let mut cfg = Self::desk_preset(master_seed);
        cfg.images = 50;
        cfg.negative_controls = 1000;
        cfg
    }

    /// 100 iterations per image (the attack-protocol variant).
    pub fn sec31_preset(master_seed: u64) -> Self {
        let mut cfg = Self::desk_preset(master_seed);
        cfg.images = 50;
        cfg.iterations = 100;
        cfg.negative_controls = 5000;
        cfg
    }
}

/// One embed -> attack -> detect sample.
#[derive(Debug, Clone, Serialize)]
pub struct SampleRow {
    pub method: String,
    pub image_id: String,
    pub attack: String,
    pub iteration: usize,
    pub r: f64,
    pub detected: bool,
    pub psnr_after_attack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub method: String,
    pub attack: String,
    pub samples: usize,
    pub detections: usize,
    pub detection_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub mean_r: f64,
    /// Coefficient of variation of the per-image detection rates.
    pub rate_cv: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FprCell {
    pub method: String,
    pub controls: usize,
    pub false_positives: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodComparison {
    pub method_a: String,
    pub method_b: String,
    pub welch: WelchResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodMean {
    pub method: String,
    pub mean_detection_rate: f64,
    pub no_attack_psnr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub method_means: Vec<MethodMean>,
    pub cells: Vec<CellSummary>,
    pub fpr: Vec<FprCell>,
    pub comparisons: Vec<MethodComparison>,
    pub rows: Vec<SampleRow>,
}

/// SplitMix64-style seed derivation; order-sensitive in `parts`.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut state = master;
    for &p in parts {
        state ^= p.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        state = z ^ (z >> 31);
    }
    state
}

enum Method {
    Ours,
    Baseline(BaselineKind),
}

fn parse_method(name: &str) -> Result<Method> {
    match name {
        "ours" => Ok(Method::Ours),
        "dct" => Ok(Method::Baseline(BaselineKind::DctClassic)),
        "lsb" => Ok(Method::Baseline(BaselineKind::Lsb)),
        "dwt" => Ok(Method::Baseline(BaselineKind::DwtClassic)),
        other => Err(EvalError::MethodUnknown(other.to_string())),
    }
}

enum Prepared {
    Ours {
        marked: GrayImage,
        original: WatermarkMatrix,
        receipt: Box<EmbedReceipt>,
        embed_cfg: Box<EmbedConfig>,
    },
    Baseline {
        marked: GrayImage,
        cfg: BaselineConfig,
    },
}

impl Prepared {
    fn marked(&self) -> &GrayImage {
        match self {
            Prepared::Ours { marked, .. } => marked,
            Prepared::Baseline { marked, .. } => marked,
        }
    }

    fn detect_in(&self, img: &GrayImage, threshold: f64) -> (f64, bool) {
        match self {
            Prepared::Ours { original, receipt, embed_cfg, .. } => {
                match extract(img, receipt, embed_cfg) {
                    Ok(extracted) => {
                        let res = detect(original, &extracted, threshold);
                        (res.r, res.detected)
                    }
                    // Attacked to degeneracy: nothing to correlate.
                    Err(_) => (0.0, false),
                }
            }
            Prepared::Baseline { cfg, .. } => match baseline_detect(img, cfg, threshold) {
                Ok(res) => (res.r, res.detected),
                Err(_) => (0.0, false),
            },
        }
    }
}

fn load_images(cfg: &EvalConfig) -> Result<Vec<(String, GrayImage)>> {
    match &cfg.corpus {
        CorpusSpec::Directory { path } => load_corpus(path, cfg.images),
        CorpusSpec::Synthetic { size } => Ok((0..cfg.images)
            .map(|i| {
                (
                    format!("drip_{i:03}"),
                    drip_image(*size, derive_seed(cfg.master_seed, &[0xC0, i as u64])),
                )
            })
            .collect()),
    }
}

/// Run the full protocol. Rows come back ordered by
/// (method, image, attack, iteration).
pub fn run_eval(cfg: &EvalConfig) -> Result<EvalReport> {
    for spec in &cfg.attacks {
        spec.validate()?;
    }
    if cfg.methods.is_empty() {
        return Err(EvalError::MethodUnknown("(none configured)".into()));
    }
    if cfg.iterations == 0 || cfg.images == 0 {
        return Err(EvalError::CorpusEmpty(format!(
            "need images >= 1 and iterations >= 1, got {} and {}",
            cfg.images, cfg.iterations
        )));
    }
    let images = load_images(cfg)?;
    if images.is_empty() {
        return Err(EvalError::CorpusEmpty("no readable images".into()));
    }
    let payload = derive_seed(cfg.master_seed, &[0xBA5E]);
    let embed_cfg = EmbedConfig {
        threshold: cfg.threshold,
        ..EmbedConfig::default()
    };

    // Embed once per (method, image).
    let methods: Vec<Method> = cfg.methods.iter().map(|m| parse_method(m)).collect::<Result<_>>()?;
    let prepared: Vec<Vec<Prepared>> = methods
        .par_iter()
        .map(|method| {
            images
                .par_iter()
                .map(|(_, img)| prepare(method, img, payload, &embed_cfg))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    // No-attack PSNR per method (corpus mean), for the parity bookkeeping.
    let method_psnr: Vec<f64> = prepared
        .iter()
        .map(|per_image| {
            let mut acc = 0.0;
            for (p, (_, img)) in per_image.iter().zip(&images) {
                acc += psnr_gray(img, p.marked()).unwrap_or(f64::INFINITY).min(99.0);
            }
            acc / per_image.len() as f64
        })
        .collect();

    // Attack/detect cells.
    struct Cell {
        method: usize,
        image: usize,
        attack: usize,
        iteration: usize,
    }
    let mut cells = Vec::new();
    for m in 0..methods.len() {
        for i in 0..images.len() {
            for a in 0..cfg.attacks.len() {
                for it in 0..cfg.iterations {
                    cells.push(Cell { method: m, image: i, attack: a, iteration: it });
                }
            }
        }
    }
    let rows: Vec<SampleRow> = cells
        .par_iter()
        .map(|cell| {
            let p = &prepared[cell.method][cell.image];
            let spec = &cfg.attacks[cell.attack];
            // The attack seed is method-independent so every method faces
            // the identical perturbation instance.
            let seed = derive_seed(
                cfg.master_seed,
                &[1, cell.image as u64, cell.attack as u64, cell.iteration as u64],
            );
            let attacked_raster = apply_seeded(spec, &p.marked().to_raster(), seed)?;
            let attacked = to_gray(&attacked_raster);
            let psnr_after = psnr_gray(p.marked(), &attacked).unwrap_or(f64::INFINITY).min(99.0);
            let (r, detected) = p.detect_in(&attacked, cfg.threshold);
            Ok(SampleRow {
                method: cfg.methods[cell.method].clone(),
                image_id: images[cell.image].0.clone(),
                attack: spec.name().to_string(),
                iteration: cell.iteration,
                r,
                detected,
                psnr_after_attack: psnr_after,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Negative controls: random-noise images run through detection only.
    let size = match &cfg.corpus {
        CorpusSpec::Synthetic { size } => *size,
        CorpusSpec::Directory { .. } => images[0].1.width.max(64),
    };
    let fpr: Vec<FprCell> = methods
        .iter()
        .enumerate()
        .map(|(mi, _)| {
            let fps: usize = (0..cfg.negative_controls)
                .into_par_iter()
                .map(|ci| {
                    let control =
                        noise_image(size, derive_seed(cfg.master_seed, &[2, ci as u64]));
                    let p = &prepared[mi][ci % images.len()];
                    let (_, detected) = p.detect_in(&control, cfg.threshold);
                    detected as usize
                })
                .sum();
            FprCell {
                method: cfg.methods[mi].clone(),
                controls: cfg.negative_controls,
                false_positives: fps,
                rate: if cfg.negative_controls > 0 {
                    fps as f64 / cfg.negative_controls as f64
                } else {
                    0.0
                },
            }
        })
        .collect();

    // Summaries.
    let mut summaries = Vec::new();
    for (mi, method) in cfg.methods.iter().enumerate() {
        for (ai, spec) in cfg.attacks.iter().enumerate() {
            let cell_rows: Vec<&SampleRow> = rows
                .iter()
                .filter(|r| r.method == *method && r.attack == spec.name())
                .collect();
            let samples = cell_rows.len();
            let detections = cell_rows.iter().filter(|r| r.detected).count();
            let dr = if samples > 0 { detections as f64 / samples as f64 } else { 0.0 };
            let (lo, hi) = wilson_interval(detections, samples);
            let mean_r = if samples > 0 {
                cell_rows.iter().map(|r| r.r).sum::<f64>() / samples as f64
            } else {
                0.0
            };
            // CV of per-image detection rates within this cell.
            let mut image_rates = Vec::new();
            for (img_id, _) in &images {
                let img_rows: Vec<&&SampleRow> =
                    cell_rows.iter().filter(|r| r.image_id == *img_id).collect();
                if !img_rows.is_empty() {
                    image_rates.push(
                        img_rows.iter().filter(|r| r.detected).count() as f64
                            / img_rows.len() as f64,
                    );
                }
            }
            let rate_cv = {
                let n = image_rates.len() as f64;
                let mean = image_rates.iter().sum::<f64>() / n.max(1.0);
                if mean > 0.0 && n > 0.0 {
                    let var = image_rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
                    var.sqrt() / mean
                } else {
                    0.0
                }
            };
            let _ = (mi, ai);
            summaries.push(CellSummary {
                method: method.clone(),
                attack: spec.name().to_string(),
                samples,
                detections,
                detection_rate: dr,
                wilson_low: lo,
                wilson_high: hi,
                mean_r,
                rate_cv,
            });
        }
    }

    let method_means: Vec<MethodMean> = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(mi, m)| {
            let xs: Vec<&SampleRow> = rows.iter().filter(|r| r.method == *m).collect();
            MethodMean {
                method: m.clone(),
                mean_detection_rate: xs.iter().filter(|r| r.detected).count() as f64
                    / xs.len().max(1) as f64,
                no_attack_psnr: method_psnr[mi],
            }
        })
        .collect();

    // Pairwise comparisons of the per-sample detection indicators against
    // the first configured method.
    let mut comparisons = Vec::new();
    if let Some(first) = cfg.methods.first() {
        let a: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == *first)
            .map(|r| r.detected as u8 as f64)
            .collect();
        for other in cfg.methods.iter().skip(1) {
            let b: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == *other)
                .map(|r| r.detected as u8 as f64)
                .collect();
            if a.len() >= 2 && b.len() >= 2 {
                comparisons.push(MethodComparison {
                    method_a: first.clone(),
                    method_b: other.clone(),
                    welch: welch(&a, &b)?,
                });
            }
        }
    }

    Ok(EvalReport { config: cfg.clone(), method_means, cells: summaries, fpr, comparisons, rows })
}

fn prepare(method: &Method, img: &GrayImage, payload: u64, embed_cfg: &EmbedConfig) -> Result<Prepared> {
    match method {
        Method::Ours => {
            let original = build_watermark(img)?;
            let blocks = img.width.div_ceil(embed_cfg.block) * img.height.div_ceil(embed_cfg.block);
            let bits = embedding_bits(embed_cfg, blocks)?;
            let (marked, receipt) = embed(img, &original, &bits, embed_cfg)?;
            Ok(Prepared::Ours {
                marked,
                original,
                receipt: Box::new(receipt),
                embed_cfg: Box::new(embed_cfg.clone()),
            })
        }
        Method::Baseline(kind) => {
            let cfg = BaselineConfig::new(*kind, payload);
            let marked = baseline_embed(img, &cfg)?;
            Ok(Prepared::Baseline { marked, cfg })
        }
    }
}
