//! Seeded generator plumbing. Every random draw in the crate goes through a
//! [`SimRng`] handed in by the caller.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for `(seed, stream)`. Distinct streams never overlap, so workers
/// and election instances can each take their own.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
