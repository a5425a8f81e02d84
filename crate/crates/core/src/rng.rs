//! Reproducible random streams.
//!
//! Every random draw in the crate comes from ChaCha8 keyed by a 64-bit seed
//! with an explicit stream id. Replication `r` of a simulation uses seed
//! `base + r`; within it, [`DATA_STREAM`] feeds the observed sample and
//! [`TEST_STREAM`] the out-of-sample points. Streams of one key never
//! overlap, so results do not depend on how replications are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DATA_STREAM: u64 = 0;
pub const TEST_STREAM: u64 = 1;
pub const SPLIT_STREAM: u64 = 2;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
