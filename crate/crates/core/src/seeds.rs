//! Seed derivation for independent random streams.
//!
//! Every replicate, sweep cell and sub-task draws from its own generator whose
//! 64-bit seed is a hash of the base seed and a path of indices. The hash is
//! the SplitMix64 finalizer applied along the path:
//!
//! ```text
//! h0 = mix(base)
//! h(k+1) = mix(h(k) ^ mix(index(k) + GOLDEN * (k + 1)))
//! ```
//!
//! so the seed of a task depends only on its indices, never on scheduling.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// The generator used for every stream in the crate.
pub type Stream = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` and an index path.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().enumerate().fold(mix(base), |h, (k, &index)| {
        mix(h ^ mix(index.wrapping_add(GOLDEN.wrapping_mul(k as u64 + 1))))
    })
}

/// A generator seeded from `seed`.
pub fn stream(seed: u64) -> Stream {
    Stream::seed_from_u64(seed)
}

/// Sub-stream tags used when one replicate needs several generators.
pub mod tag {
    pub const VERTICES: u64 = 0;
    pub const GROUPS: u64 = 1;
    pub const MEMBERSHIP: u64 = 2;
    pub const AUX: u64 = 3;
}
