//! Watermarking layer: Lorenz-chaotic bit generation, the 2x2 feature
//! watermark with adaptive mid-frequency DCT embedding, semi-blind
//! extraction and Pearson detection, the standardized attack suite, and
//! the LSB/DCT/DWT baseline watermarkers.

pub mod attacks;
pub mod baselines;
pub mod chaos;
pub mod error;
pub mod features;
pub mod strength;
pub mod watermark;

pub use attacks::{apply, apply_seeded, apply_seeded_logged, AttackKind, AttackLog, AttackSpec};
pub use baselines::{baseline_detect, baseline_embed, BaselineConfig, BaselineKind, PAYLOAD_BITS};
pub use chaos::{lorenz_bits, ChaoticBits, LorenzConfig};
pub use error::{MarkError, Result};
pub use features::multiscale_features;
pub use strength::{capacity_bound, detection_bound, local_strength, optimize_strength, q_function, StrengthMap};
pub use watermark::{
    build_watermark, detect, embed, embedding_bits, extract, pearson, DetectionResult,
    EmbedConfig, EmbedReceipt, WatermarkMatrix, DETECTION_THRESHOLD, RECEIPT_VERSION,
};
