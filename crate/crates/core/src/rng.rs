//! Seeding conventions.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`] seeded through
//! [`rng_from_seed`]. ChaCha8 output is specified bit-for-bit, so datasets and
//! reports are reproducible across platforms. Replicate `i` of a run with
//! master seed `s` uses `derive_seed(s, i)`.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `index` under master seed `master`:
/// `splitmix64(master ^ splitmix64(index))`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
