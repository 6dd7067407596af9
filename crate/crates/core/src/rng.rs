//! Seeded random streams.
//!
//! Every stochastic component draws from a ChaCha8 generator addressed by a
//! `(seed, stream)` pair, so independent tasks (forest trees, experiment cells)
//! get reproducible streams regardless of execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
