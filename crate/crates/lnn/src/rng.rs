//! Deterministic seed-substream derivation.
//!
//! Every source of randomness in the crate draws from a ChaCha stream keyed
//! by the master seed and a path of tags (stage, replication index, ...).
//! Work items can then run in any order, on any number of threads, and still
//! consume exactly the same random values.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stage tags used when deriving substreams. Values are arbitrary but fixed.
pub mod tags {
    pub const REGRESSORS: u64 = 0x11;
    pub const ERRORS: u64 = 0x12;
    pub const WILD: u64 = 0x21;
    pub const SCORE: u64 = 0x22;
    pub const KERNEL: u64 = 0x23;
    pub const REPLICATION: u64 = 0x31;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a tag path.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    for &tag in path {
        state ^= tag.wrapping_mul(0xff51_afd7_ed55_8ccd);
        out = splitmix64(&mut state);
    }
    out
}

/// An independent RNG for the given tag path.
pub fn substream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let a = derive_seed(7, &[tags::WILD, 0]);
        let b = derive_seed(7, &[tags::WILD, 0]);
        let c = derive_seed(7, &[tags::WILD, 1]);
        let d = derive_seed(8, &[tags::WILD, 0]);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn substreams_reproduce() {
        let mut r1 = substream(42, &[tags::ERRORS, 3]);
        let mut r2 = substream(42, &[tags::ERRORS, 3]);
        for _ in 0..32 {
            assert_eq!(r1.random::<u64>(), r2.random::<u64>());
        }
    }

    #[test]
    fn sibling_streams_differ() {
        let mut r1 = substream(42, &[tags::ERRORS, 3]);
        let mut r2 = substream(42, &[tags::ERRORS, 4]);
        let same = (0..16).filter(|_| r1.random::<u64>() == r2.random::<u64>()).count();
        assert_eq!(same, 0);
    }
}
