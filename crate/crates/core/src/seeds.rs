//! Seed derivation. Every random stream is a ChaCha8 generator whose seed is
//! a splitmix64 mix of a base seed, a stream tag and an index, so no two
//! tasks ever share generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout the crate.
pub type Rng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Null-calibration replicates.
pub const STREAM_CALIBRATION: u64 = 0x6361_6c69;
/// Evaluation replicates (size or power).
pub const STREAM_EVALUATION: u64 = 0x6576_616c;
/// Auxiliary draws inside a generator (weights, burn-in, shuffles).
pub const STREAM_AUX: u64 = 0x6175_7869;

/// The splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate `index` of stream `stream` under `base`.
pub fn derive(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index)
}

pub fn rng_from(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
