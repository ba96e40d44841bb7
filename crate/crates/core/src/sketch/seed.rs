//! Counter-based seed derivation.
//!
//! Every random draw in a run is keyed by `derive_seed(master, stream)`, so a
//! snapshot's sketch can be rebuilt from the master seed and its index alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags for non-snapshot draws. Snapshot sketches use their index.
pub mod stream {
    pub const MODEL_INIT: u64 = 0xC0DE_0000_0000_0001;
    pub const TARGET_INIT: u64 = 0xC0DE_0000_0000_0002;
    pub const MINIBATCH: u64 = 0xC0DE_0000_0000_0003;
    pub const PERTURB: u64 = 0xC0DE_0000_0000_0004;
    pub const OFFLINE_SKETCH: u64 = 0xC0DE_0000_0001_0000;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a stream counter into an independent 64-bit seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream))
}

/// The generator every component draws from.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_streams_distinct_seeds() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|t| derive_seed(7, t)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(7, 3), derive_seed(8, 3));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
