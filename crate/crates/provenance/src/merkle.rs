//! Binary Merkle commitments over feature leaves with logarithmic
//! inclusion proofs. Odd nodes duplicate at each level; a single leaf's
//! root is just its hash. The hash function is a parameter (SHA-256
//! default; SHA3-256 available).

use serde::{Deserialize, Serialize};
use sha2::Digest as _;

pub type Hash32 = [u8; 32];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HashKind {
    #[default]
    Sha256,
    Sha3_256,
}

impl HashKind {
    pub fn digest(&self, data: &[u8]) -> Hash32 {
        match self {
            HashKind::Sha256 => {
                let mut h = sha2::Sha256::new();
                h.update(data);
                h.finalize().into()
            }
            HashKind::Sha3_256 => {
                let mut h = sha3::Sha3_256::new();
                h.update(data);
                h.finalize().into()
            }
        }
    }

    fn combine(&self, left: &Hash32, right: &Hash32) -> Hash32 {
        let mut buf = [0u8; 64];
        buf[..32].copy_from_slice(left);
        buf[32..].copy_from_slice(right);
        self.digest(&buf)
    }
}

#[derive(Debug, Clone)]
pub struct MerkleTree {
    hash: HashKind,
    /// levels[0] = leaf hashes, last level = [root].
    levels: Vec<Vec<Hash32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MerkleProof {
    pub leaf_index: usize,
    /// Sibling hashes from the leaf level upward, hex-encoded on the wire.
    pub path: Vec<String>,
    pub root: String,
    pub hash: HashKind,
}

impl MerkleTree {
    pub fn build(leaves: &[impl AsRef<[u8]>], hash: HashKind) -> Option<Self> {
        if leaves.is_empty() {
            return None;
        }
        let mut levels = vec![leaves.iter().map(|l| hash.digest(l.as_ref())).collect::<Vec<_>>()];
        while levels.last().unwrap().len() > 1 {
            let prev = levels.last().unwrap();
            let mut next = Vec::with_capacity(prev.len().div_ceil(2));
            for pair in prev.chunks(2) {
                let right = pair.get(1).unwrap_or(&pair[0]);
                next.push(hash.combine(&pair[0], right));
            }
            levels.push(next);
        }
        Some(Self { hash, levels })
    }

    pub fn root(&self) -> Hash32 {
        self.levels.last().unwrap()[0]
    }

    pub fn leaf_count(&self) -> usize {
        self.levels[0].len()
    }

    pub fn prove(&self, index: usize) -> crate::error::Result<MerkleProof> {
        let n = self.leaf_count();
        if index >= n {
            return Err(crate::error::ProvenanceError::IndexOutOfRange { index, leaves: n });
        }
        let mut path = Vec::new();
        let mut idx = index;
        for level in &self.levels[..self.levels.len() - 1] {
            let sibling = if idx.is_multiple_of(2) {
                // Odd tail duplicates itself.
                *level.get(idx + 1).unwrap_or(&level[idx])
            } else {
                level[idx - 1]
            };
            path.push(hex::encode(sibling));
            idx /= 2;
        }
        Ok(MerkleProof {
            leaf_index: index,
            path,
            root: hex::encode(self.root()),
            hash: self.hash,
        })
    }
}

/// Recompute the root from a leaf and its sibling path.
pub fn verify(proof: &MerkleProof, leaf: &[u8]) -> bool {
    let mut current = proof.hash.digest(leaf);
    let mut idx = proof.leaf_index;
    for sibling_hex in &proof.path {
        let Ok(sibling) = hex::decode(sibling_hex) else {
            return false;
        };
        let Ok(sibling): std::result::Result<Hash32, _> = sibling.try_into() else {
            return false;
        };
        current = if idx.is_multiple_of(2) {
            proof.hash.combine(&current, &sibling)
        } else {
            proof.hash.combine(&sibling, &current)
        };
        idx /= 2;
    }
    hex::encode(current) == proof.root
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(data: &[u8]) -> Hash32 {
        HashKind::Sha256.digest(data)
    }

    #[test]
    fn single_leaf_root_is_leaf_hash() {
        let tree = MerkleTree::build(&[b"A"], HashKind::Sha256).unwrap();
        assert_eq!(tree.root(), h(b"A"));
        let proof = tree.prove(0).unwrap();
        assert!(proof.path.is_empty());
        assert!(verify(&proof, b"A"));
    }

    #[test]
    fn two_leaf_root_matches_definition() {
        let tree = MerkleTree::build(&[b"A", b"B"], HashKind::Sha256).unwrap();
        let expected = HashKind::Sha256.combine(&h(b"A"), &h(b"B"));
        assert_eq!(tree.root(), expected);
        let proof = tree.prove(0).unwrap();
        assert_eq!(proof.path, vec![hex::encode(h(b"B"))]);
        assert!(verify(&proof, b"A"));
        assert!(!verify(&proof, b"B"));
    }

    #[test]
    fn seven_leaves_all_proofs_verify_and_tampers_fail() {
        let leaves: Vec<Vec<u8>> = (0..7u8).map(|i| vec![i, i + 1, i + 2]).collect();
        let tree = MerkleTree::build(&leaves, HashKind::Sha256).unwrap();
        for (i, leaf) in leaves.iter().enumerate() {
            let proof = tree.prove(i).unwrap();
            assert_eq!(proof.path.len(), 3); // ceil(log2(7))
            assert!(verify(&proof, leaf));
            let mut tampered = leaf.clone();
            tampered[0] ^= 0x01;
            assert!(!verify(&proof, &tampered));
        }
        assert!(tree.prove(7).is_err());
    }

    #[test]
    fn sha3_variant_produces_different_roots() {
        let a = MerkleTree::build(&[b"A", b"B"], HashKind::Sha256).unwrap();
        let b = MerkleTree::build(&[b"A", b"B"], HashKind::Sha3_256).unwrap();
        assert_ne!(a.root(), b.root());
        let proof = b.prove(1).unwrap();
        assert!(verify(&proof, b"B"));
    }
}
