//! Seeded random streams.
//!
//! Every stream is a ChaCha20 keystream addressed by `(seed, stream)`: the
//! key comes from the seed and the 64-bit stream id selects an independent
//! counter space. Replication `k` of a simulation always reads stream `k`, so
//! results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Stream id reserved for drawing random graph structures.
pub const STRUCTURE_STREAM: u64 = u64::MAX;

pub fn stream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
