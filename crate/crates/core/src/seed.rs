//! Seed derivation for independent random substreams.
//!
//! Every stochastic task (fold assignment, a bootstrap draw, one forest tree)
//! gets its own generator seeded from a hash of `(master, a, b)`, so the order
//! in which tasks run has no effect on their output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every substream.
pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with two stream coordinates into a 64-bit seed.
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    let h = splitmix64(master);
    let h = splitmix64(h ^ a.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix64(h ^ b.wrapping_mul(0xA076_1D64_78BD_642F))
}

pub fn stream_rng(master: u64, a: u64, b: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, a, b))
}

/// Stream tags keeping the pipeline stages' substreams apart.
pub(crate) mod tags {
    pub const FOLDS: u64 = 0x464f_4c44;
    pub const RANKERS: u64 = 0x5241_4e4b;
    pub const EVALUATION: u64 = 0x4556_414c;
}
