//! Stable seed derivation. Seeds are hashes of labelled parts so that any
//! sub-computation can be reproduced without replaying an RNG stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Builder over length-prefixed parts, hashed with SHA-256.
#[derive(Clone, Default)]
pub struct SeedHasher {
    hasher: Sha256,
}

impl SeedHasher {
    pub fn new(domain: &str) -> Self {
        SeedHasher::default().str(domain)
    }

    pub fn str(mut self, part: &str) -> Self {
        self.hasher.update((part.len() as u64).to_le_bytes());
        self.hasher.update(part.as_bytes());
        self
    }

    pub fn u64(mut self, part: u64) -> Self {
        self.hasher.update(8u64.to_le_bytes());
        self.hasher.update(part.to_le_bytes());
        self
    }

    fn digest(self) -> [u8; 32] {
        self.hasher.finalize().into()
    }

    pub fn finish(self) -> u64 {
        let d = self.digest();
        u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.digest())
    }
}

pub fn rng_from(seed: u64, label: &str) -> ChaCha8Rng {
    SeedHasher::new(label).u64(seed).rng()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parts_are_length_prefixed() {
        let a = SeedHasher::new("x").str("ab").str("c").finish();
        let b = SeedHasher::new("x").str("a").str("bc").finish();
        assert_ne!(a, b);
        assert_eq!(a, SeedHasher::new("x").str("ab").str("c").finish());
    }
}
