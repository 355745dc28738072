//! Counter-based randomness.
//!
//! Every random draw is addressed by `(seed, stream, point index)`, so the
//! value a point receives does not depend on iteration order or on how many
//! threads process the batch.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::profile::{CorruptionKind, Severity};

/// 32-bit words reserved per point within a stream.
const WORDS_PER_POINT: u128 = 256;

/// Seed for one `(global seed, frame, corruption, severity)` combination.
pub fn derive_seed(global: u64, frame_id: &str, kind: CorruptionKind, severity: Severity) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    h.update((frame_id.len() as u64).to_le_bytes());
    h.update(frame_id.as_bytes());
    h.update(kind.as_str().as_bytes());
    h.update([0]);
    h.update(severity.as_str().as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    base: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A sequential generator for whole-frame decisions (subset selection, per-frame constants).
    pub fn stream(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(stream);
        rng.set_word_pos(0);
        rng
    }

    /// The generator owned by point `index` within `stream`.
    pub fn point(&self, stream: u64, index: usize) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(stream);
        rng.set_word_pos(index as u128 * WORDS_PER_POINT);
        rng
    }
}
