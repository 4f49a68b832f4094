//! `fractalmark`: multifractal signatures, feature watermarking, attack
//! simulation, robustness benchmarking, and provenance artifacts from one
//! binary.
//!
//! Exit codes: 0 success, 1 domain error (degenerate inputs, receipt
//! mismatch — a negative detection verdict is NOT an error), 2 usage or
//! I/O failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "fractalmark", version, about = "Fractal and turbulence image signatures with chaos-seeded feature watermarking")]
struct Cli {
    /// Master seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker thread cap (defaults to the available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for all output artifacts.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fractal, turbulence, and style metrics as one JSON report per image.
    Analyze {
        /// Input images (PNG or JPEG).
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Skip the wavelet-maxima exponents (faster on large inputs).
        #[arg(long)]
        skip_wtmm: bool,
        /// Also write the box-count log-log scatter as CSV per image.
        #[arg(long)]
        scatter: bool,
    },
    /// Embed the feature watermark; writes a PNG and a receipt JSON.
    Embed {
        image: PathBuf,
        /// Base embedding strength in DCT-coefficient units.
        #[arg(long, default_value_t = 4.0 / 255.0)]
        alpha: f64,
        /// Texture adaptation parameter.
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        /// Search the largest strength meeting this PSNR floor (dB)
        /// instead of using --alpha directly.
        #[arg(long)]
        optimize_tau: Option<f64>,
    },
    /// Detect the watermark in a (possibly attacked) image via its receipt.
    Detect {
        image: PathBuf,
        receipt: PathBuf,
        /// Correlation threshold T.
        #[arg(long, default_value_t = 0.95)]
        threshold: f64,
    },
    /// Apply one standardized attack and write the result.
    Attack {
        image: PathBuf,
        /// noise | jpeg | crop | blur | scale | rotate
        #[arg(long)]
        kind: String,
        /// Noise std (noise attack).
        #[arg(long)]
        sigma: Option<f64>,
        /// Removed area fraction (crop attack).
        #[arg(long)]
        area: Option<f64>,
        /// Compression rounds (jpeg attack).
        #[arg(long)]
        rounds: Option<u32>,
        /// Quality bound (jpeg attack).
        #[arg(long)]
        quality: Option<u8>,
    },
    /// Run the comparative robustness benchmark and emit report files.
    Bench {
        /// desk | sec44 | sec31
        #[arg(long, default_value = "desk")]
        preset: String,
        /// EvalConfig JSON overriding the preset.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Restrict to these methods (comma separated).
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        /// Override the corpus image count.
        #[arg(long)]
        images: Option<usize>,
        /// Override the per-image attack iterations.
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Fingerprint an image: token id, Merkle artifacts, NFT metadata.
    Fingerprint {
        image: PathBuf,
        #[arg(long, default_value = fractalmark_provenance::DEFAULT_ARTIST)]
        artist: String,
        /// ISO-8601 UTC timestamp override (defaults to now).
        #[arg(long)]
        timestamp: Option<String>,
        /// Emit k-of-n shares of the token id, e.g. --shamir 2,3.
        #[arg(long)]
        shamir: Option<String>,
    },
    /// Style metric diagnostics (TV, texture, drip, Gram) per image.
    Metrics {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore the error if a pool already exists (tests build their own).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let ctx = commands::Context { seed: cli.seed, output_dir: cli.output_dir.clone() };
    let result = match cli.command {
        Command::Analyze { inputs, skip_wtmm, scatter } => {
            commands::analyze(&ctx, &inputs, skip_wtmm, scatter)
        }
        Command::Embed { image, alpha, gamma, optimize_tau } => {
            commands::embed(&ctx, &image, alpha, gamma, optimize_tau)
        }
        Command::Detect { image, receipt, threshold } => {
            commands::detect(&ctx, &image, &receipt, threshold)
        }
        Command::Attack { image, kind, sigma, area, rounds, quality } => {
            commands::attack(&ctx, &image, &kind, sigma, area, rounds, quality)
        }
        Command::Bench { preset, config, methods, images, iterations } => {
            commands::bench(&ctx, &preset, config.as_deref(), methods, images, iterations)
        }
        Command::Fingerprint { image, artist, timestamp, shamir } => {
            commands::fingerprint(&ctx, &image, &artist, timestamp.as_deref(), shamir.as_deref())
        }
        Command::Metrics { inputs } => commands::metrics(&ctx, &inputs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(err.exit_code())
        }
    }
}
