//! Hashing helpers shared by ids, sub-seeds and content digests.

use sha2::{Digest, Sha256};

/// Name recorded next to every content digest.
pub const DIGEST_ALGORITHM: &str = "sha256";

/// SHA-256 over a sequence of length-prefixed parts, so `["ab", "c"]` and
/// `["a", "bc"]` hash differently.
pub fn hash_parts(parts: &[&[u8]]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    hasher.finalize().into()
}

pub fn hash_parts_hex(parts: &[&[u8]]) -> String {
    hex::encode(hash_parts(parts))
}

/// Hex SHA-256 of raw bytes (file contents).
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Deterministic value in `[0, 1)` derived from the parts (53 bits of the hash).
pub fn unit_interval(parts: &[&[u8]]) -> f64 {
    let h = hash_parts(parts);
    let word = u64::from_le_bytes(h[..8].try_into().expect("8 bytes"));
    (word >> 11) as f64 / (1u64 << 53) as f64
}
