//! Sub-seed derivation.
//!
//! Every random stream in the pipeline is derived from one master seed as
//! `derive(seed, component)`, so that changing how one component consumes
//! randomness never shifts another component's stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sub-seed for a named component: FNV-1a over the name, folded with the
/// master seed through SplitMix64.
pub fn derive(seed: u64, component: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in component.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    mix64(seed ^ mix64(h))
}

/// Sub-seed for the `index`-th member of an indexed family (trees of a forest).
pub fn derive_indexed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
