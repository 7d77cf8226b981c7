//! Per-replicate random streams.
//!
//! Replicate `i` of a run seeded with `seed` draws from
//! `Xoshiro256PlusPlus::seed_from_u64(replicate_key(seed, i))`, where
//!
//! ```text
//! replicate_key(seed, i) = mix64(mix64(seed) + i * 0x9E3779B97F4A7C15)   (mod 2^64)
//! mix64(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!           z ^= z >> 27; z *= 0x94D049BB133111EB;
//!           z ^= z >> 31
//! ```
//!
//! `mix64` is the SplitMix64 finalizer, a bijection on `u64`, so distinct
//! replicates of one seed always get distinct keys. The stream of a
//! replicate does not depend on which worker runs it. This mapping is
//! frozen: changing it changes every published ensemble.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// Generator used for every replicate.
pub type ReplicateRng = Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn replicate_key(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed).wrapping_add(index.wrapping_mul(GOLDEN_GAMMA)))
}

pub fn replicate_rng(seed: u64, index: u64) -> ReplicateRng {
    Xoshiro256PlusPlus::seed_from_u64(replicate_key(seed, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn mix64_reference_values() {
        // SplitMix64 from state 0: the first output is mix64(GOLDEN_GAMMA).
        assert_eq!(mix64(GOLDEN_GAMMA), 0xE220_A839_7B1D_CDAF);
        assert_eq!(mix64(0), 0);
    }

    #[test]
    fn golden_streams() {
        assert_eq!(replicate_key(7, 0), GOLDEN_KEYS[0]);
        assert_eq!(replicate_key(7, 1), GOLDEN_KEYS[1]);
        assert_eq!(replicate_key(u64::MAX, 12345), GOLDEN_KEYS[2]);
        let mut r = replicate_rng(7, 0);
        assert_eq!(r.next_u64(), GOLDEN_FIRST_DRAW);
    }

    #[test]
    fn keys_differ_across_replicates() {
        let keys: std::collections::HashSet<u64> =
            (0..10_000).map(|i| replicate_key(1, i)).collect();
        assert_eq!(keys.len(), 10_000);
    }

    // Frozen when the stream layout was fixed; the first two keys were
    // cross-checked against an independent Python transcription of mix64.
    const GOLDEN_KEYS: [u64; 3] = [
        0xB78B_9F38_A670_E787,
        0x863B_891F_4C0A_BD4F,
        0x3115_CAD5_45A1_19CD,
    ];
    const GOLDEN_FIRST_DRAW: u64 = 0x26B3_2293_C5E3_BE9D;
}
