//! Deterministic randomness: seed derivation and the small set of draws the
//! crate needs. Everything routes through ChaCha8 so results are identical
//! across platforms and runs.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(h: u64, bytes: &[u8]) -> u64 {
    let mut h = h;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a base seed and a sequence of labels.
///
/// Parts are length-prefixed before hashing, so `["ab", "c"]` and
/// `["a", "bc"]` derive different seeds.
pub fn derive_seed(base: u64, parts: &[&str]) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &base.to_le_bytes());
    for part in parts {
        h = fnv1a(h, &(part.len() as u64).to_le_bytes());
        h = fnv1a(h, part.as_bytes());
    }
    splitmix64(h)
}

/// Builds the stream cipher RNG for a seed.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, bound)`. Rejection sampling, no modulo bias.
pub fn next_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    assert!(bound > 0, "empty range");
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

/// Uniform index in `[0, len)`.
pub fn next_index(rng: &mut ChaCha8Rng, len: usize) -> usize {
    next_below(rng, len as u64) as usize
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn next_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Returns true with probability `p` (clamped to `[0, 1]`).
pub fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> bool {
    if p <= 0.0 {
        return false;
    }
    if p >= 1.0 {
        return true;
    }
    next_f64(rng) < p
}

/// In-place Fisher-Yates shuffle.
pub fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = next_index(rng, i + 1);
        items.swap(i, j);
    }
}

/// Picks an index proportionally to integer weights. Zero-weight entries are
/// never picked; the total must be positive.
pub fn pick_weighted(rng: &mut ChaCha8Rng, weights: &[u64]) -> usize {
    let total: u64 = weights.iter().sum();
    assert!(total > 0, "all weights zero");
    let mut r = next_below(rng, total);
    for (i, &w) in weights.iter().enumerate() {
        if r < w {
            return i;
        }
        r -= w;
    }
    unreachable!("cumulative walk exhausted below total")
}
