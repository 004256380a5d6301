//! Deterministic seed derivation.
//!
//! Every random stream in the crate is a ChaCha generator keyed by a SHA-256
//! digest of a tuple of labelled parts, so a stream depends only on what it is
//! for and never on scheduling or call order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

fn digest(parts: &[&str]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    hasher.finalize().into()
}

/// 64-bit seed for a tuple of parts. Distinct tuples give distinct seeds
/// (up to hash collisions); the encoding is length-prefixed so
/// `("ab", "c")` and `("a", "bc")` differ.
pub fn derive_seed(parts: &[&str]) -> u64 {
    let d = digest(parts);
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

pub fn rng_for(parts: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(digest(parts))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    rng_for(&["seed", &seed.to_string()])
}

/// Hex SHA-256 of arbitrary bytes, used for content fingerprints.
pub fn fingerprint(bytes: &[u8]) -> String {
    let d: [u8; 32] = Sha256::digest(bytes).into();
    d.iter().map(|b| format!("{b:02x}")).collect()
}
