use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use fractalmark_core::{
    analyze_gray, psnr, read_image, style_metrics, to_gray, write_png, AnalysisOptions,
    CoreError, RasterImage,
};
use fractalmark_eval::{emit_report, run_eval, EvalConfig, EvalReport};
use fractalmark_mark::{
    apply_seeded_logged, build_watermark, detect as detect_matrices, embed as embed_watermark,
    embedding_bits, extract, multiscale_features, optimize_strength, AttackKind, AttackSpec,
    EmbedConfig, EmbedReceipt, MarkError, RECEIPT_VERSION,
};
use fractalmark_provenance::{
    canonical_feature_bytes, feature_tree, fingerprint_with, merkle_verify, split, HashKind,
    NftMetadata,
};

/// Domain failures exit 1, usage and I/O failures exit 2.
#[derive(Debug)]
pub enum CliError {
    Domain(String),
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(m) => write!(f, "{m}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::DegenerateInput(_) | CoreError::EmptyMask => CliError::Domain(e.to_string()),
            CoreError::Codec(_) | CoreError::Io(_) => CliError::Io(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<MarkError> for CliError {
    fn from(e: MarkError) -> Self {
        match e {
            MarkError::Core(c) => c.into(),
            MarkError::ReceiptMismatch => CliError::Domain(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<fractalmark_eval::EvalError> for CliError {
    fn from(e: fractalmark_eval::EvalError) -> Self {
        match e {
            fractalmark_eval::EvalError::Io(io) => CliError::Io(io.to_string()),
            fractalmark_eval::EvalError::CorpusEmpty(_)
            | fractalmark_eval::EvalError::MethodUnknown(_) => CliError::Usage(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<fractalmark_provenance::ProvenanceError> for CliError {
    fn from(e: fractalmark_provenance::ProvenanceError) -> Self {
        CliError::Domain(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub struct Context {
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Context {
    fn out_path(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.output_dir)?;
        Ok(self.output_dir.join(name))
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image")
        .to_string()
}

fn load_image(path: &Path) -> Result<RasterImage> {
    read_image(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

// --- analyze ---

#[derive(Serialize)]
struct AnalyzeOutcome {
    file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<fractalmark_core::ImageAnalysis>,
}

pub fn analyze(ctx: &Context, inputs: &[PathBuf], skip_wtmm: bool, scatter: bool) -> Result<()> {
    let opts = AnalysisOptions { include_wtmm: !skip_wtmm, ..AnalysisOptions::default() };
    let mut had_domain_error = false;
    for input in inputs {
        let raster = load_image(input)?;
        let gray = to_gray(&raster);
        let outcome = match analyze_gray(&gray, &opts) {
            Ok(mut report) => {
                report.style = style_metrics(&raster);
                if scatter {
                    let series = &report.fractal.capacity.series;
                    let mut csv = String::from("scale,count\n");
                    for (s, c) in series.scales.iter().zip(&series.counts) {
                        csv.push_str(&format!("{s:.6},{c}\n"));
                    }
                    std::fs::write(ctx.out_path(&format!("{}.boxcount.csv", stem(input)))?, csv)?;
                }
                println!(
                    "{}: D = {:.4} (r2 {:.4}), mu = {:.2}, width = {:.3}",
                    input.display(),
                    report.fractal.capacity.dimension,
                    report.fractal.capacity.r_squared,
                    report.turbulence.mean_power_u8,
                    report.fractal.singularity.width,
                );
                AnalyzeOutcome { file: input.display().to_string(), error: None, report: Some(report) }
            }
            Err(e @ (CoreError::DegenerateInput(_) | CoreError::EmptyMask)) => {
                had_domain_error = true;
                println!("{}: DegenerateInput", input.display());
                AnalyzeOutcome {
                    file: input.display().to_string(),
                    error: Some(format!("DegenerateInput: {e}")),
                    report: None,
                }
            }
            Err(e) => return Err(e.into()),
        };
        let path = ctx.out_path(&format!("{}.analysis.json", stem(input)))?;
        write_json(&path, &outcome)?;
    }
    if had_domain_error {
        return Err(CliError::Domain("one or more inputs were degenerate".into()));
    }
    Ok(())
}

// --- embed / detect ---

#[derive(Serialize)]
struct EmbedSummary {
    image: String,
    marked: String,
    receipt: String,
    alpha_base: f64,
    psnr_db: String,
}

pub fn embed(
    ctx: &Context,
    image: &Path,
    alpha: f64,
    gamma: f64,
    optimize_tau: Option<f64>,
) -> Result<()> {
    let raster = load_image(image)?;
    let gray = to_gray(&raster);
    let mut cfg = EmbedConfig { alpha_base: alpha, gamma, ..EmbedConfig::default() };
    let watermark = build_watermark(&gray)?;
    let blocks = gray.width.div_ceil(cfg.block) * gray.height.div_ceil(cfg.block);
    let bits = embedding_bits(&cfg, blocks)?;
    if let Some(tau) = optimize_tau {
        cfg.alpha_base = optimize_strength(&gray, &watermark, &bits, &cfg, tau)?;
    }
    let (marked, receipt) = embed_watermark(&gray, &watermark, &bits, &cfg)?;

    let marked_path = ctx.out_path(&format!("{}.marked.png", stem(image)))?;
    write_png(&marked_path, &marked.to_raster()).map_err(CliError::from)?;
    let receipt_path = ctx.out_path(&format!("{}.receipt.json", stem(image)))?;
    write_json(&receipt_path, &receipt)?;

    // PSNR of the artifact actually written (8-bit), so a zero-strength
    // embedding reports the infinite sentinel.
    let written = quantize8(&marked.to_raster());
    let db = psnr(&quantize8(&gray.to_raster()), &written)?;
    let summary = EmbedSummary {
        image: image.display().to_string(),
        marked: marked_path.display().to_string(),
        receipt: receipt_path.display().to_string(),
        alpha_base: cfg.alpha_base,
        psnr_db: if db.is_infinite() { "+inf".to_string() } else { format!("{db:.2}") },
    };
    println!("{}", serde_json::to_string(&summary).expect("serializable"));
    Ok(())
}

fn quantize8(img: &RasterImage) -> RasterImage {
    RasterImage {
        width: img.width,
        height: img.height,
        channels: img.channels,
        data: img.data.iter().map(|v| (v * 255.0).round() / 255.0).collect(),
    }
}

pub fn detect(ctx: &Context, image: &Path, receipt_path: &Path, threshold: f64) -> Result<()> {
    let _ = ctx;
    let raster = load_image(image)?;
    let gray = to_gray(&raster);
    let receipt: EmbedReceipt = serde_json::from_str(&std::fs::read_to_string(receipt_path)?)
        .map_err(|e| CliError::Domain(format!("ReceiptMismatch: unreadable receipt: {e}")))?;
    if receipt.version != RECEIPT_VERSION || receipt.config.validate().is_err() {
        return Err(CliError::Domain("ReceiptMismatch: version or config invalid".into()));
    }
    let extracted = extract(&gray, &receipt, &receipt.config)?;
    let result = detect_matrices(&receipt.watermark, &extracted, threshold);
    println!("{}", serde_json::to_string(&result).expect("serializable"));
    Ok(())
}

// --- attack ---

#[derive(Serialize)]
struct AttackSummary {
    image: String,
    attacked: String,
    kind: String,
    seed: u64,
    psnr_db: f64,
    #[serde(flatten)]
    log: fractalmark_mark::AttackLog,
}

pub fn attack(
    ctx: &Context,
    image: &Path,
    kind: &str,
    sigma: Option<f64>,
    area: Option<f64>,
    rounds: Option<u32>,
    quality: Option<u8>,
) -> Result<()> {
    let raster = load_image(image)?;
    let kind_enum = match kind {
        "noise" => {
            let s = sigma.unwrap_or(0.05);
            AttackKind::GaussianNoise { sigma: (s, s), intensity: (0.3, 0.5) }
        }
        "jpeg" => {
            let r = rounds.unwrap_or(5);
            let q = quality.unwrap_or(10);
            AttackKind::JpegRounds { rounds: (r, r), quality: (1, q), perturb: true }
        }
        "crop" => {
            let a = area.unwrap_or(0.5);
            AttackKind::CropInpaint { area: (a, a), regions: (7, 10) }
        }
        "blur" => AttackKind::Blur,
        "scale" => AttackKind::Scale { factor: (0.9, 1.1) },
        "rotate" => AttackKind::Rotate { degrees: (-3.0, 3.0) },
        other => return Err(CliError::Usage(format!("unknown attack kind: {other}"))),
    };
    let spec = AttackSpec { kind: kind_enum, seed: ctx.seed };
    let (attacked, log) = apply_seeded_logged(&spec, &raster, ctx.seed)?;
    let out = ctx.out_path(&format!("{}.{}.png", stem(image), spec.name()))?;
    write_png(&out, &attacked).map_err(CliError::from)?;
    let summary = AttackSummary {
        image: image.display().to_string(),
        attacked: out.display().to_string(),
        kind: spec.name().to_string(),
        seed: ctx.seed,
        psnr_db: psnr(&raster, &attacked)?.min(99.0),
        log,
    };
    println!("{}", serde_json::to_string(&summary).expect("serializable"));
    Ok(())
}

// --- bench ---

pub fn bench(
    ctx: &Context,
    preset: &str,
    config: Option<&Path>,
    methods: Option<Vec<String>>,
    images: Option<usize>,
    iterations: Option<usize>,
) -> Result<()> {
    let mut cfg = if let Some(path) = config {
        serde_json::from_str::<EvalConfig>(&std::fs::read_to_string(path)?)
            .map_err(|e| CliError::Usage(format!("invalid config: {e}")))?
    } else {
        match preset {
            "desk" => EvalConfig::desk_preset(ctx.seed),
            "sec44" => EvalConfig::sec44_preset(ctx.seed),
            "sec31" => EvalConfig::sec31_preset(ctx.seed),
            other => return Err(CliError::Usage(format!("unknown preset: {other}"))),
        }
    };
    if let Some(methods) = methods {
        cfg.methods = methods;
    }
    if let Some(images) = images {
        cfg.images = images;
    }
    if let Some(iterations) = iterations {
        cfg.iterations = iterations;
    }
    let report = run_eval(&cfg)?;
    std::fs::create_dir_all(&ctx.output_dir)?;
    emit_report(&report, &ctx.output_dir)?;
    print_summary_table(&report);
    Ok(())
}

fn print_summary_table(report: &EvalReport) {
    println!("{:<8} {:<16} {:>6} {:>8} {:>18}", "method", "attack", "n", "DR", "95% Wilson");
    for cell in &report.cells {
        println!(
            "{:<8} {:<16} {:>6} {:>8.3} {:>8.3} - {:>6.3}",
            cell.method, cell.attack, cell.samples, cell.detection_rate, cell.wilson_low, cell.wilson_high
        );
    }
    for m in &report.method_means {
        println!(
            "mean {:<8} DR {:.3}  (no-attack PSNR {:.2} dB)",
            m.method, m.mean_detection_rate, m.no_attack_psnr
        );
    }
    for f in &report.fpr {
        println!("fpr  {:<8} {:.4} ({}/{})", f.method, f.rate, f.false_positives, f.controls);
    }
    for c in &report.comparisons {
        println!(
            "stat {} vs {}: t = {:.3}, p = {:.3e}, d = {:.3}",
            c.method_a, c.method_b, c.welch.t, c.welch.p, c.welch.d
        );
    }
}

// --- fingerprint ---

#[derive(Serialize)]
struct FingerprintSummary {
    image: String,
    token_id: String,
    merkle_root: String,
    metadata: String,
    proofs: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    shares: Vec<String>,
}

pub fn fingerprint(
    ctx: &Context,
    image: &Path,
    artist: &str,
    timestamp: Option<&str>,
    shamir: Option<&str>,
) -> Result<()> {
    let raster = load_image(image)?;
    let gray = to_gray(&raster);
    let codes = multiscale_features(&gray, 3, 8)?;
    let features: Vec<f64> = codes.iter().map(|&c| c as f64).collect();
    let fp = fingerprint_with(&features, HashKind::Sha256)?;

    let opts = AnalysisOptions { include_wtmm: false, ..AnalysisOptions::default() };
    let analysis = analyze_gray(&gray, &opts)?;
    let timestamp = timestamp
        .map(str::to_string)
        .unwrap_or_else(|| chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string());
    let metadata = NftMetadata {
        fractal_dimension: analysis.fractal.capacity.dimension,
        turbulence_mean_power: analysis.turbulence.mean_power_u8,
        turbulence_variance_power: analysis.turbulence.std_power_u8,
        timestamp,
        artist: artist.to_string(),
        token_id: fp.token_id.clone(),
        merkle_root: fp.merkle_root.clone(),
    };
    let meta_path = ctx.out_path(&format!("{}.metadata.json", stem(image)))?;
    std::fs::write(&meta_path, metadata.to_canonical_json())?;

    // Inclusion proofs for every feature leaf, verified before emission.
    let tree = feature_tree(&features, HashKind::Sha256)?;
    let proofs: Vec<_> = (0..features.len())
        .map(|i| tree.prove(i))
        .collect::<fractalmark_provenance::Result<_>>()?;
    for (i, proof) in proofs.iter().enumerate() {
        debug_assert!(merkle_verify(proof, &canonical_feature_bytes(features[i])));
    }
    let proofs_path = ctx.out_path(&format!("{}.proofs.json", stem(image)))?;
    write_json(&proofs_path, &proofs)?;

    let mut share_paths = Vec::new();
    if let Some(spec) = shamir {
        let (k, n) = parse_shamir(spec)?;
        // Secret: the token id's leading 8 bytes in a Mersenne-prime field.
        const PRIME: u64 = 2_305_843_009_213_693_951; // 2^61 - 1
        let secret = u64::from_be_bytes(
            hex::decode(&fp.token_id)
                .expect("token id is hex")[..8]
                .try_into()
                .expect("8 bytes"),
        ) % PRIME;
        let shares = split(secret, k, n, PRIME, ctx.seed)?;
        for (x, y) in &shares.shares {
            let path = ctx.out_path(&format!("{}.share_{x}.json", stem(image)))?;
            write_json(
                &path,
                &serde_json::json!({
                    "index": x,
                    "value": y.to_string(),
                    "prime": PRIME.to_string(),
                    "threshold": k,
                }),
            )?;
            share_paths.push(path.display().to_string());
        }
    }

    let summary = FingerprintSummary {
        image: image.display().to_string(),
        token_id: fp.token_id,
        merkle_root: fp.merkle_root,
        metadata: meta_path.display().to_string(),
        proofs: proofs_path.display().to_string(),
        shares: share_paths,
    };
    println!("{}", serde_json::to_string(&summary).expect("serializable"));
    Ok(())
}

fn parse_shamir(spec: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!("--shamir expects k,n, got {spec}")));
    }
    let k = parts[0].trim().parse::<usize>().map_err(|e| CliError::Usage(e.to_string()))?;
    let n = parts[1].trim().parse::<usize>().map_err(|e| CliError::Usage(e.to_string()))?;
    if k == 0 || k > n {
        return Err(CliError::Usage(format!("need 1 <= k <= n, got {k},{n}")));
    }
    Ok((k, n))
}

// --- metrics ---

#[derive(Serialize)]
struct MetricsOutcome {
    file: String,
    metrics: fractalmark_core::StyleMetrics,
}

pub fn metrics(ctx: &Context, inputs: &[PathBuf]) -> Result<()> {
    for input in inputs {
        let raster = load_image(input)?;
        let outcome = MetricsOutcome {
            file: input.display().to_string(),
            metrics: style_metrics(&raster),
        };
        let path = ctx.out_path(&format!("{}.metrics.json", stem(input)))?;
        write_json(&path, &outcome)?;
        println!(
            "{}: tv {:.6}, texture {:.6e}, drip {:.6e}",
            input.display(),
            outcome.metrics.tv_loss,
            outcome.metrics.texture_loss,
            outcome.metrics.drip_loss,
        );
    }
    Ok(())
}
