//! Seeded, splittable random streams.
//!
//! A stream is identified by a `(seed, stream_id)` pair and backed by ChaCha8,
//! whose 64-bit stream selector gives independent sequences for distinct ids
//! under the same key.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Bits of the stream id reserved for the purpose tag in [`RngStream::trial`].
const PURPOSE_BITS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Stream for one purpose (tree, bits, shuffle, ...) of one trial.
    ///
    /// Trials are packed into the high bits and purposes into the low 16 bits,
    /// so every `(trial, purpose)` pair maps to a distinct stream id.
    pub fn trial(seed: u64, trial: u64, purpose: u64) -> Self {
        debug_assert!(purpose < (1 << PURPOSE_BITS));
        debug_assert!(trial < (1 << (64 - PURPOSE_BITS)));
        Self::new(seed, (trial << PURPOSE_BITS) | purpose)
    }
}
