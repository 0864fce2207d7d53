//! Keyed random streams.
//!
//! Every draw is addressed by `(seed, purpose, trial, stream)`: the first
//! three select a ChaCha key and `stream` selects a ChaCha stream, so the
//! randomness of one window never depends on how many other windows are
//! simulated or on the order in which trials run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which estimator a stream belongs to. Estimators sharing a purpose see
/// the same samples, which pairs them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Slot = 1,
    Passage = 2,
    Snapshot = 3,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialKey {
    key: [u8; 32],
}

impl TrialKey {
    pub fn new(seed: u64, purpose: Purpose, trial: u64) -> Self {
        let mut state = splitmix(seed ^ splitmix(purpose as u64));
        state = splitmix(state ^ trial);
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            state = splitmix(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        TrialKey { key }
    }

    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(id);
        rng
    }
}

/// Maps ℤ to ℕ: 0, -1, 1, -2, 2, ... -> 0, 1, 2, 3, 4, ...
pub fn zigzag(i: i64) -> u64 {
    ((i << 1) ^ (i >> 63)) as u64
}

/// Stream id of window `(i, j)` in time slot `slot`.
pub fn window_stream(slot: i64, i: i64, j: i64) -> u64 {
    (zigzag(slot) << 40) | (zigzag(i) << 20) | zigzag(j)
}

/// Stream ids reserved for per-trial draws that belong to no window.
pub const TRIAL_STREAM: u64 = u64::MAX;
