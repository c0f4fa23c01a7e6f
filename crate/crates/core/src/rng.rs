//! Counter-based random streams.
//!
//! Every random quantity is drawn from a ChaCha stream selected by
//! `(master seed, stream id)`. Sample `i` of an experiment always uses stream
//! `i`, so results do not depend on execution order or thread count. Graph
//! generation uses stream ids counted down from `u64::MAX`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream for sample `index` under `seed`.
pub fn sample_stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream for generator attempt `attempt` under `seed`.
pub fn graph_stream(seed: u64, attempt: u32) -> Stream {
    sample_stream(seed, u64::MAX - u64::from(attempt))
}
