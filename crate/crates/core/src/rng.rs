//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 generator. A [`RngSeed`]
//! is split into child seeds with [`RngSeed::derive`] (a SplitMix64 mix of
//! the parent seed and a tag), and a seed opens independent numbered streams
//! with [`RngSeed::stream`] (the ChaCha stream id). Parallel workers must
//! each open their own stream; no generator is ever shared.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    /// Child seed for a named purpose.
    pub fn derive(self, tag: u64) -> Self {
        Self(splitmix64(self.0 ^ splitmix64(tag.wrapping_add(0x6a09_e667_f3bc_c909))))
    }

    /// Stream 0 of this seed.
    pub fn rng(self) -> SimRng {
        self.stream(0)
    }

    /// Independent stream number `index`.
    pub fn stream(self, index: u64) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        Self(seed)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
