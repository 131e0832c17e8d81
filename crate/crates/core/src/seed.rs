//! Stable seed derivation.
//!
//! Every random stream in the crate is keyed by a master seed plus a tuple of
//! labels (series id, rate, iteration, ...). Keys are hashed with SHA-256 so the
//! derived seeds are identical across platforms, toolchains and thread counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Builder for a derived seed.
#[derive(Clone)]
pub struct SeedKey {
    hasher: Sha256,
}

impl SeedKey {
    pub fn new(master: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(master.to_le_bytes());
        SeedKey { hasher }
    }

    pub fn tag(mut self, label: &str) -> Self {
        // length prefix keeps ("ab","c") distinct from ("a","bc")
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self
    }

    pub fn index(mut self, value: u64) -> Self {
        self.hasher.update([0xA5]);
        self.hasher.update(value.to_le_bytes());
        self
    }

    pub fn real(mut self, value: f64) -> Self {
        self.hasher.update([0x5A]);
        self.hasher.update(value.to_bits().to_le_bytes());
        self
    }

    pub fn seed(self) -> u64 {
        let digest = self.hasher.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(bytes)
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed())
    }
}
