//! Portable seeded randomness for generation.
//!
//! The stream is ChaCha20 keyed by SHA-256 over length-prefixed parts
//! (`seed`, a purpose label, and optionally an article id). Integer ranges use
//! rejection sampling on raw 64-bit words and shuffles are plain Fisher-Yates,
//! so output depends only on the pinned `rand_chacha` stream, never on
//! platform or on helper implementations in other crates.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::digest::hash_parts;

pub struct ScpRng(ChaCha20Rng);

impl ScpRng {
    pub fn from_parts(parts: &[&[u8]]) -> Self {
        ScpRng(ChaCha20Rng::from_seed(hash_parts(parts)))
    }

    /// Generator for one purpose (`label`) under a benchmark seed.
    pub fn for_seed(seed: u64, label: &str) -> Self {
        Self::from_parts(&[&seed.to_le_bytes(), label.as_bytes()])
    }

    /// Independent sub-generator for one article.
    pub fn for_article(seed: u64, label: &str, article_id: &str) -> Self {
        Self::from_parts(&[&seed.to_le_bytes(), label.as_bytes(), article_id.as_bytes()])
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        // Largest multiple of n that fits; values above it are rejected.
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return (x % n) as usize;
            }
        }
    }

    /// Uniform float in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n`, in draw order.
    pub fn sample_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} of {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}
