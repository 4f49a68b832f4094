//! NFT metadata record and royalty arithmetic.
//!
//! The JSON layout mirrors the published metadata example field-for-field
//! (plus the token id and Merkle root) and is rendered canonically: fixed
//! field order, two-decimal feature values, so identical inputs produce
//! byte-identical documents.

use serde::{Deserialize, Serialize};

use crate::error::{ProvenanceError, Result};

pub const DEFAULT_ARTIST: &str = "MindSpore-VGG-Pollock";
pub const METADATA_SCHEMA: &str = "fractalmark-meta/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NftMetadata {
    pub fractal_dimension: f64,
    pub turbulence_mean_power: f64,
    pub turbulence_variance_power: f64,
    /// ISO-8601 UTC, e.g. "2025-01-01T12:34:56Z".
    pub timestamp: String,
    pub artist: String,
    pub token_id: String,
    pub merkle_root: String,
}

impl NftMetadata {
    /// Canonical JSON: stable field order, `%.2f` feature rendering.
    pub fn to_canonical_json(&self) -> String {
        format!(
            "{{\n  \"fractal_dimension\": {:.2},\n  \"turbulence_mean_power\": {:.2},\n  \"turbulence_variance_power\": {:.2},\n  \"timestamp\": {},\n  \"artist\": {},\n  \"token_id\": {},\n  \"merkle_root\": {}\n}}\n",
            self.fractal_dimension,
            self.turbulence_mean_power,
            self.turbulence_variance_power,
            json_string(&self.timestamp),
            json_string(&self.artist),
            json_string(&self.token_id),
            json_string(&self.merkle_root),
        )
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// EIP-2981-style royalty: floor(price * bps / 10000).
pub fn royalty(sale_price: u64, basis_points: u16) -> Result<u64> {
    if basis_points > 10_000 {
        return Err(ProvenanceError::BpsOutOfRange(basis_points));
    }
    Ok(((sale_price as u128 * basis_points as u128) / 10_000) as u64)
}
