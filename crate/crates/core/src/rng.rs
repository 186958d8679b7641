//! Seeding conventions.
//!
//! Every random choice is drawn from ChaCha8 seeded with a 64-bit value, so a
//! (config, seed) pair maps to the same output on every platform. Derived
//! seeds are built by folding the parts through SplitMix64:
//!
//! ```text
//! h = splitmix64(master)
//! for p in parts { h = splitmix64(h ^ splitmix64(p)) }
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One step of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(master), |h, &p| splitmix64(h ^ splitmix64(p)))
}
