//! Token identity from quantized features: canonical fixed-point
//! serialization hashed to a 32-byte token id, plus a Merkle root over the
//! per-feature leaves.

use serde::Serialize;

use crate::error::{ProvenanceError, Result};
use crate::merkle::{HashKind, MerkleTree};

#[derive(Debug, Clone, Serialize)]
pub struct FeatureFingerprint {
    pub features: Vec<f64>,
    /// SHA-256 (by default) of the canonical serialization, hex.
    pub token_id: String,
    /// Merkle root over the per-feature encodings, hex.
    pub merkle_root: String,
    pub hash: HashKind,
}

/// Fixed-point encoding: round(feature * 1e6) as i64 little-endian.
/// Float formatting never enters the hash, so token ids are stable across
/// platforms.
pub fn canonical_feature_bytes(feature: f64) -> [u8; 8] {
    ((feature * 1e6).round() as i64).to_le_bytes()
}

/// Length-prefixed canonical serialization of the whole vector.
pub fn canonical_serialization(features: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + features.len() * 8);
    out.extend_from_slice(&(features.len() as u32).to_le_bytes());
    for &f in features {
        out.extend_from_slice(&canonical_feature_bytes(f));
    }
    out
}

pub fn fingerprint(features: &[f64]) -> Result<FeatureFingerprint> {
    fingerprint_with(features, HashKind::default())
}

pub fn fingerprint_with(features: &[f64], hash: HashKind) -> Result<FeatureFingerprint> {
    if features.is_empty() {
        return Err(ProvenanceError::EmptyFeatures);
    }
    let token_id = hex::encode(hash.digest(&canonical_serialization(features)));
    let leaves: Vec<[u8; 8]> = features.iter().map(|&f| canonical_feature_bytes(f)).collect();
    let tree = MerkleTree::build(&leaves, hash).expect("non-empty leaves");
    Ok(FeatureFingerprint {
        features: features.to_vec(),
        token_id,
        merkle_root: hex::encode(tree.root()),
        hash,
    })
}

/// The Merkle tree for proof emission over the same leaves the
/// fingerprint committed to.
pub fn feature_tree(features: &[f64], hash: HashKind) -> Result<MerkleTree> {
    if features.is_empty() {
        return Err(ProvenanceError::EmptyFeatures);
    }
    let leaves: Vec<[u8; 8]> = features.iter().map(|&f| canonical_feature_bytes(f)).collect();
    Ok(MerkleTree::build(&leaves, hash).expect("non-empty leaves"))
}
