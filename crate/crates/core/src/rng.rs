//! Seed derivation for reproducible random substreams.
//!
//! Every consumer of randomness (shuffling, initialisation, per-positive
//! negative sampling) gets its own ChaCha8 stream keyed by a tuple of
//! integers, so results never depend on batch size or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

/// SplitMix64 finaliser.
pub const fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `seed`, order-sensitively.
pub fn derive(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix64(seed), |acc, &p| mix64(acc ^ mix64(p)))
}

/// Stream keyed by `(seed, parts..)`.
pub fn stream(seed: u64, parts: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive(seed, parts))
}

/// Domain tags so that e.g. the init stream and the shuffle stream never
/// collide for the same user seed.
pub mod tag {
    pub const INIT: u64 = 0x1111;
    pub const SHUFFLE: u64 = 0x2222;
    pub const NEGATIVES: u64 = 0x3333;
    pub const SPLIT: u64 = 0x4444;
}
