//! Seeded random streams.
//!
//! Every generator in this crate is a ChaCha8 stream
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`), which is portable and
//! value-stable across platforms. Per-trial streams are derived from a
//! master seed and a trial index by a SplitMix64 finalizer so that trial
//! `i` sees the same stream no matter which worker runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for trial `index` of a campaign keyed by `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xd134_2543_de82_ef95))
}
