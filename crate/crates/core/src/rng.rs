//! Seedable, fully specified randomness.
//!
//! All library randomness flows through [`RngState`], a ChaCha8 stream
//! cipher generator seeded explicitly. Identical seeds produce identical
//! draw sequences on every platform; time- or OS-seeded generators are
//! deliberately not constructible here.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output mix, used to derive independent per-chain seeds from a
/// master seed: `derive_seed(master, i)` hashes the i-th increment of the
/// golden-ratio Weyl sequence started at `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic generator plus the seed that created it.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The generator for `derive_seed(master, index)`.
    pub fn derived(master: u64, index: u64) -> Self {
        Self::from_seed(derive_seed(master, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn identical_seeds_identical_streams() {
        let mut a = RngState::from_seed(42);
        let mut b = RngState::from_seed(42);
        let xs: Vec<u64> = (0..16).map(|_| a.rng().random()).collect();
        let ys: Vec<u64> = (0..16).map(|_| b.rng().random()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn derived_seeds_differ_per_index() {
        let seeds: Vec<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), seeds.len());
    }

    #[test]
    fn derive_seed_matches_splitmix_reference() {
        // SplitMix64 seeded with 0 produces this well-known first output.
        assert_eq!(derive_seed(0, 0), 0xE220_A839_7B1D_CDAF);
    }
}
