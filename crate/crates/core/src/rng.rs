//! Labeled seed derivation.
//!
//! Every random stream in the crate is a ChaCha generator keyed by
//! SHA-256 of `(seed, label, indices...)`. Streams never depend on thread
//! count or evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a 256-bit key from a base seed, a purpose label and an index path.
pub fn derive_key(seed: u64, label: &str, indices: &[u64]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    for i in indices {
        hasher.update(i.to_le_bytes());
    }
    hasher.finalize().into()
}

/// Derives a 64-bit child seed.
pub fn derive_seed(seed: u64, label: &str, indices: &[u64]) -> u64 {
    let key = derive_key(seed, label, indices);
    u64::from_le_bytes(key[..8].try_into().expect("8 bytes"))
}

/// Generator for the stream `(seed, label, indices...)`.
pub fn stream(seed: u64, label: &str, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_key(seed, label, indices))
}
