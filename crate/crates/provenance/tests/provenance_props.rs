//! Exhaustive and property checks for the identity layer: proof coverage
//! over all tree sizes, tamper sensitivity, and share reconstruction.

use fractalmark_provenance::*;
use proptest::prelude::*;

#[test]
fn proofs_verify_for_all_tree_sizes_up_to_64() {
    for n in 1..=64usize {
        let leaves: Vec<Vec<u8>> = (0..n).map(|i| format!("leaf-{i}").into_bytes()).collect();
        let tree = MerkleTree::build(&leaves, HashKind::Sha256).unwrap();
        for (i, leaf) in leaves.iter().enumerate() {
            let proof = tree.prove(i).unwrap();
            assert!(merkle_verify(&proof, leaf), "n={n} i={i}");
            assert_eq!(proof.path.len(), (n as f64).log2().ceil() as usize, "n={n}");
        }
    }
}

#[test]
fn single_bit_tampers_always_change_the_root() {
    let leaves: Vec<Vec<u8>> = (0..64u32).map(|i| i.to_le_bytes().to_vec()).collect();
    let tree = MerkleTree::build(&leaves, HashKind::Sha256).unwrap();
    // 100 scattered single-bit flips across leaves and bit positions.
    for trial in 0..100usize {
        let leaf_idx = (trial * 13) % 64;
        let bit = (trial * 7) % 32;
        let mut tampered = leaves.clone();
        tampered[leaf_idx][bit / 8] ^= 1 << (bit % 8);
        let other = MerkleTree::build(&tampered, HashKind::Sha256).unwrap();
        assert_ne!(tree.root(), other.root(), "trial {trial}");
        let proof = tree.prove(leaf_idx).unwrap();
        assert!(!merkle_verify(&proof, &tampered[leaf_idx]));
    }
}

#[test]
fn fingerprint_survives_two_independent_runs() {
    let features: Vec<f64> = (0..24).map(|i| (i as f64) * 0.37 - 3.0).collect();
    let a = fingerprint(&features).unwrap();
    let b = fingerprint(&features).unwrap();
    assert_eq!(a.token_id, b.token_id);
    assert_eq!(a.merkle_root, b.merkle_root);
    // Proofs from the feature tree bind to the fingerprint root.
    let tree = feature_tree(&features, HashKind::Sha256).unwrap();
    assert_eq!(hex::encode(tree.root()), a.merkle_root);
    let proof = tree.prove(5).unwrap();
    assert!(merkle_verify(&proof, &canonical_feature_bytes(features[5])));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shamir_roundtrip(secret in 0u64..257, k in 1usize..5, extra in 0usize..4, seed in 0u64..1000) {
        let n = k + extra;
        let shares = split(secret, k, n, 257, seed).unwrap();
        // Any k-subset reconstructs; rotate a contiguous window so each
        // case exercises a different combination of distinct indices.
        let subset: Vec<(u64, u64)> = (0..k)
            .map(|i| shares.shares[(seed as usize + i) % n])
            .collect();
        prop_assert_eq!(reconstruct(&subset, k, 257).unwrap(), secret);
    }

    #[test]
    fn merkle_proofs_reject_wrong_leaves(n in 2usize..32, idx in 0usize..32) {
        let idx = idx % n;
        let leaves: Vec<Vec<u8>> = (0..n).map(|i| vec![i as u8, 0xAB]).collect();
        let tree = MerkleTree::build(&leaves, HashKind::Sha256).unwrap();
        let proof = tree.prove(idx).unwrap();
        prop_assert!(merkle_verify(&proof, &leaves[idx]));
        let wrong = vec![0xFFu8, 0xEE];
        prop_assert!(!merkle_verify(&proof, &wrong));
    }
}
