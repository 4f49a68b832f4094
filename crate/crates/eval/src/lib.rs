//! Batch robustness harness comparing the feature watermark against the
//! LSB/DCT/DWT baselines under the standardized attack suite, with
//! detection rates, false-positive rates, statistics, and report files.

pub mod corpus;
pub mod error;
pub mod harness;
pub mod report;
pub mod stats;

pub use corpus::{drip_image, load_corpus, noise_image, synthesize_corpus};
pub use error::{EvalError, Result};
pub use harness::{
    derive_seed, run_eval, CellSummary, CorpusSpec, EvalConfig, EvalReport, FprCell,
    MethodComparison, MethodMean, SampleRow, CONFIG_VERSION,
};
pub use report::{emit_report, render_csv, render_summary};
pub use stats::{normal_sf, welch, wilson_interval, WelchResult};
