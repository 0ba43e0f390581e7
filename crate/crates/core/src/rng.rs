//! Counter-based random streams.
//!
//! Every draw is addressed by `(master seed, purpose, path index, counter)`.
//! The ChaCha block function is keyed by the seed and purpose, the path index
//! selects the ChaCha stream and the counter selects the word position, so a
//! draw never depends on how many other draws were made before it or on which
//! thread made them.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Purpose {
    /// Gaussian increments of a driving Brownian path.
    Increments,
    /// One uniform per excursion, thresholded against α.
    Signs,
    /// Fair signs used when unfolding a class-Σ submartingale.
    Unfold,
    /// Free slot for experiment-level auxiliary draws.
    Auxiliary,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Increments => 0x1C0F_FEE0_0000_0001,
            Purpose::Signs => 0x1C0F_FEE0_0000_0002,
            Purpose::Unfold => 0x1C0F_FEE0_0000_0003,
            Purpose::Auxiliary => 0x1C0F_FEE0_0000_0004,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
    pub path_index: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            path_index: 0,
        }
    }

    pub fn for_path(self, path_index: u64) -> Self {
        Self { path_index, ..self }
    }

    /// Sequential generator for `purpose` on this path.
    pub fn stream(&self, purpose: Purpose) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&purpose.tag().to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.path_index);
        rng
    }

    /// The `counter`-th uniform in `[0, 1)` of the `purpose` stream.
    pub fn uniform(&self, purpose: Purpose, counter: u64) -> f64 {
        let mut rng = self.stream(purpose);
        rng.set_word_pos(u128::from(counter) * 2);
        unit_f64(rng.next_u64())
    }
}

fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
