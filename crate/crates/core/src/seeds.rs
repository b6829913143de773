//! Stable hashing and named random substreams.
//!
//! Every random decision in the toolkit derives from one user seed through a
//! named substream ("split", "flip", "init", "shuffle", "sampling"), so the
//! stages stay independent of one another and of iteration order.

use std::hash::Hasher;

use fnv::FnvHasher;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SPLIT: &str = "split";
pub const FLIP: &str = "flip";
pub const INIT: &str = "init";
pub const SHUFFLE: &str = "shuffle";
pub const SAMPLING: &str = "sampling";

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded 64-bit hash of a byte string. Stable across platforms and releases.
pub fn stable_hash(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::with_key(0xcbf2_9ce4_8422_2325 ^ mix(seed));
    h.write(bytes);
    mix(h.finish())
}

pub fn derive_seed(seed: u64, stream: &str) -> u64 {
    stable_hash(seed, stream.as_bytes())
}

pub fn rng(seed: u64, stream: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream))
}
