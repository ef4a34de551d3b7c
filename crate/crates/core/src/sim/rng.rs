//! Counter-based random streams: one ChaCha8 key per run, one stream per
//! slot. Any slot can be replayed without touching the slots before it, so
//! slot batches can run in any order or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SlotStreams {
    base: ChaCha8Rng,
}

impl SlotStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generator dedicated to `slot`.
    pub fn slot(&self, slot: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(slot);
        rng.set_word_pos(0);
        rng
    }
}

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent job under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}
