//! Seeded random streams.
//!
//! Every run derives its generators from one 64-bit seed. Each consumer gets
//! its own ChaCha8 stream (same key, distinct stream id), so adding draws to
//! one agent never shifts another agent's sequence, and traces are identical
//! across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used by the shooter agent.
pub const SHOOTER_STREAM: u64 = 0;

/// Stream `id` for agent-level randomness; evacuee `i` uses `1 + i`.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
