//! Reproducible random streams.
//!
//! Every source is a ChaCha8 stream cipher keyed from a 64-bit seed
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`) with the 64-bit ChaCha stream
//! id selected by `set_stream`. ChaCha is counter based, so each
//! `(seed, stream)` pair names an independent, platform-stable sequence.
//! The algorithm identity is part of the reproducibility contract: changing
//! it changes every experiment output.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name of the generator behind [`RandomSource`], recorded in manifests.
pub const RNG_ALGORITHM: &str = "rand_chacha::ChaCha8Rng (seed_from_u64, set_stream)";

/// A seeded, splittable random stream.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh source on the same seed with a child stream id derived from
    /// this stream and `label`. Splitting does not advance `self`.
    pub fn split(&self, label: u64) -> Self {
        Self::new(self.seed, derive_stream(self.stream, label))
    }
}

/// Mixes a parent stream id and a label into a child stream id (SplitMix64
/// finalizer over the combined words).
pub fn derive_stream(parent: u64, label: u64) -> u64 {
    let mut z = parent.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(label).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
