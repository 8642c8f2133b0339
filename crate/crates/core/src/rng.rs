//! Random streams.
//!
//! Every random draw in the crate comes from ChaCha20 (`rand_chacha`),
//! which produces the same stream on every platform for a given 64-bit
//! seed and stream id. Independent sub-streams (one per federated client,
//! one per seed replicate) are selected with ChaCha's stream counter rather
//! than by re-seeding.

use rand::SeedableRng;
pub use rand_chacha::ChaCha20Rng;

pub type OracleRng = ChaCha20Rng;

pub fn seeded(seed: u64) -> OracleRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Stream `stream` of the generator seeded with `seed`.
pub fn derived(seed: u64, stream: u64) -> OracleRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
