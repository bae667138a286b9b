//! Deterministic seed derivation.
//!
//! Every Monte-Carlo trial draws from its own generator whose seed is a hash
//! of the master seed and the trial index, so changing the number of trials
//! never perturbs the trials that were already there.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `index` under `master`.
pub fn derive(master: u64, index: u64) -> u64 {
    mix64(mix64(master.wrapping_add(0x9e37_79b9_7f4a_7c15)) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Generator for `(master, index)`.
pub fn rng_for(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, index))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
