//! Content hashing and deterministic seed derivation.

use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256 of the given bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{:02x}", byte));
    }
    out
}

/// Short (12 hex char) content id, used for run directory names.
pub fn short_id(bytes: &[u8]) -> String {
    sha256_hex(bytes)[..12].to_string()
}

/// SplitMix64 step: maps any 64-bit value to a well-mixed successor.
///
/// Used to derive independent sub-seeds from a master seed without
/// correlating the resulting RNG streams.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a sub-seed from a master seed and a sequence of components.
pub fn derive_seed(master: u64, components: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &c in components {
        state = splitmix64(state ^ c);
    }
    state
}
