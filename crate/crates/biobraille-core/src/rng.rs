//! Deterministic seed derivation.
//!
//! Every stochastic stage of the pipeline draws from its own ChaCha stream
//! whose seed is derived from a base seed plus an integer path (domain tag,
//! then indices such as trial number, electrode, channel). Streams keyed by
//! different paths are statistically independent, and nothing ever touches a
//! global RNG, so results are reproducible and order-independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keeping unrelated streams apart. Values are arbitrary but fixed.
pub mod tag {
    pub const TRIAL: u64 = 0x01;
    pub const COUPLING: u64 = 0x02;
    pub const DURATION_JITTER: u64 = 0x03;
    pub const EVOKED: u64 = 0x04;
    pub const BASELINE: u64 = 0x05;
    pub const FOLDS: u64 = 0x06;
    pub const SVM: u64 = 0x07;
    pub const FOREST: u64 = 0x08;
    pub const NOISE_CHANNELS: u64 = 0x09;
    pub const NOISE_SAMPLES: u64 = 0x0a;
    pub const ORGANOID: u64 = 0x0b;
    pub const SWEEP: u64 = 0x0c;
    pub const SPONTANEOUS: u64 = 0x0d;
    pub const BOOTSTRAP: u64 = 0x0e;
    pub const SIM: u64 = 0x0f;
    pub const SPATIAL: u64 = 0x10;
    pub const ROBUST: u64 = 0x11;
    pub const CV: u64 = 0x12;
    pub const RECRUIT: u64 = 0x13;
}

/// SplitMix64 finalizer; good avalanche, cheap, stable across platforms.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and an integer path.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut s = mix64(base);
    for &p in path {
        s = mix64(s ^ mix64(p));
    }
    s
}

/// ChaCha stream for the given base seed and path.
pub fn stream(base: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, path))
}
