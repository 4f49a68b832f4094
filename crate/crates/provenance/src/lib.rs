//! Cryptographic identity layer: feature fingerprints with deterministic
//! token ids, Merkle commitments and inclusion proofs, (k, n) threshold
//! sharing over a prime field, royalty arithmetic, and canonical NFT
//! metadata emission.

pub mod error;
pub mod fingerprint;
pub mod merkle;
pub mod metadata;
pub mod shamir;

pub use error::{ProvenanceError, Result};
pub use fingerprint::{
    canonical_feature_bytes, canonical_serialization, feature_tree, fingerprint, fingerprint_with,
    FeatureFingerprint,
};
pub use merkle::{verify as merkle_verify, Hash32, HashKind, MerkleProof, MerkleTree};
pub use metadata::{royalty, NftMetadata, DEFAULT_ARTIST, METADATA_SCHEMA};
pub use shamir::{is_prime, reconstruct, split, split_with_coefficients, ShamirShares};
