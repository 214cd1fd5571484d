//! Reproducible random number streams.
//!
//! All randomness in the crate flows through [`RngStream`], a ChaCha12
//! counter-mode generator addressed by an explicit `(seed, stream)` pair.
//! Distinct streams from the same seed are independent, which lets parallel
//! trials draw reproducibly regardless of scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha12Rng,
    seed: u64,
    stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngStream { inner, seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// Fold tag words into a seed (SplitMix64 steps), for deriving independent
/// sub-experiment seeds from one root seed.
pub fn mix_seed(seed: u64, words: &[u64]) -> u64 {
    let mut state = seed;
    for &w in words {
        state = state.wrapping_add(0x9E3779B97F4A7C15).wrapping_add(w);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        state = z ^ (z >> 31);
    }
    state
}
