//! Seed derivation shared by the seeded components.
//!
//! Every source of randomness in the crate is a ChaCha stream keyed by a
//! 64-bit seed. Sub-seeds are derived with SplitMix64 so that independent
//! streams (per projection column, per forest tree, per pipeline stage)
//! never alias each other for distinct tags.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; full-period mixing of a 64-bit state.
pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derives the sub-seed for stream `tag` of a master seed.
pub(crate) fn derive(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ splitmix64(tag))
}

/// A ChaCha stream for the given seed.
pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
