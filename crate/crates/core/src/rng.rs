//! Seeded randomness.
//!
//! Every random draw in the crate comes from [`ChaCha8Rng`] seeded with a `u64`.
//! Independent streams (genotypes, effects, noise, per-repetition subsamples)
//! get their own seed through [`derive_seed`], so adding a draw to one stream
//! never shifts another and parallel execution order cannot change results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags for [`derive_seed`].
pub mod stream {
    pub const GENOTYPES: u64 = 0x47454e4f;
    pub const EFFECTS: u64 = 0x42455441;
    pub const NOISE: u64 = 0x4e4f4953;
    pub const SNP_SELECTION: u64 = 0x534e5053;
    pub const SUBSAMPLE: u64 = 0x53554253;
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a base seed with a stream tag and an index into a fresh seed.
///
/// `derive_seed(s, t, i) = splitmix64(splitmix64(splitmix64(s) ^ t) ^ i)`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index)
}
