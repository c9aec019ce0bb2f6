//! Seeding and permutation generation with a documented, reproducible identity.
//!
//! Everything random in this crate flows through two primitives:
//!
//! 1. `derive_seed(master, index)` — a counter-keyed substream seed. This is the
//!    SplitMix64 output function applied to `master XOR index·0x9E3779B97F4A7C15`
//!    (the 64-bit golden-ratio constant). Replicate r of a permutation test, trial
//!    t of a power study, and restart r of k-means each get their own substream
//!    via their counter, so parallel execution order can never change results.
//!
//! 2. `ChaCha8Rng::seed_from_u64(sub_seed)` — the ChaCha stream cipher with 8
//!    rounds (IETF variant, as implemented by `rand_chacha`), which turns each
//!    derived seed into an independent, high-quality stream.
//!
//! Permutations are generated by a hand-rolled Fisher–Yates shuffle whose index
//! draws use rejection sampling on `next_u64` (see `uniform_index`). The shuffle
//! is written out here, rather than delegated to `rand`'s `shuffle`, so the exact
//! algorithm is part of this crate's contract and does not drift with dependency
//! upgrades. Test vectors for all three primitives live in the unit tests below
//! and in the README.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E3779B97F4A7C15;

/// Derives an independent substream seed from a master seed and a counter.
///
/// This is the SplitMix64 finalizer (`mix64`) of `master ^ index·GOLDEN_GAMMA`;
/// distinct indices produce statistically independent seeds, and the map is
/// deterministic across platforms.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// The stream generator used everywhere in this crate.
pub fn stream(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

/// Uniform draw from `0..bound` by rejection sampling on `next_u64`.
///
/// Draws whose value falls in the final partial block (`>= zone`) are
/// rejected, so every residue is exactly equally likely. `bound` must be ≥ 1.
pub(crate) fn uniform_index(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound >= 1);
    let zone = (u64::MAX / bound) * bound; // largest multiple of bound that fits
    loop {
        let r = rng.next_u64();
        if r < zone {
            return r % bound;
        }
    }
}

/// Fisher–Yates permutation of `0..n`, driven by one dedicated substream.
///
/// The shuffle walks i from n−1 down to 1, swapping position i with a
/// uniformly drawn j in `0..=i`. Given the same `(master, index, n)` the
/// output is identical regardless of how many permutations are being
/// generated concurrently elsewhere.
pub fn permutation(master: u64, index: u64, n: usize) -> Vec<usize> {
    let mut rng = stream(master, index);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = uniform_index(&mut rng, (i + 1) as u64) as usize;
        perm.swap(i, j);
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_seed_vectors() {
        // Frozen vectors; these are the crate's reproducibility contract.
        assert_eq!(derive_seed(0, 0), 0x0000000000000000);
        assert_eq!(derive_seed(0, 1), 0xE220A8397B1DCDAF);
        assert_eq!(derive_seed(0, 2), 0x6E789E6AA1B965F4);
        assert_eq!(derive_seed(42, 7), 0x53AD348AF3DDAF4B);
        assert_eq!(derive_seed(u64::MAX, 3), 0x8F33834013B31F7C);
        assert_eq!(derive_seed(0xDEADBEEF, 123456789), 0x9EB9DDA0769225F7);
    }

    #[test]
    fn chacha8_stream_vectors() {
        // First four next_u64 outputs of several substreams, frozen so that a
        // change to rand_chacha's pinned version (or to derive_seed) surfaces
        // here instead of silently shifting every downstream result.
        let cases: [(u64, u64, [u64; 4]); 4] = [
            (0, 0, [
                0xB585F767A79A3B6C, 0x7746A55FBAD8C037,
                0xB2FB0D3281E2A6E6, 0x0F6760A48F9B887C,
            ]),
            (42, 0, [
                0x7F9735417E8FBB99, 0xEC23FBFB86E66914,
                0xA925ACB4B789339F, 0x94FEF0BDBB222612,
            ]),
            (42, 1, [
                0x84AC011FDD425A82, 0xCDEF2AEE06522671,
                0xB9625C26BE270A83, 0x68828C470AD21010,
            ]),
            (0xDEADBEEF, 7, [
                0x9F5E630E3C4B282E, 0x534995281610DDA7,
                0xE731E0EC4C88E25E, 0x28B7D4B5F394BCFF,
            ]),
        ];
        for (master, index, expected) in cases {
            let mut rng = stream(master, index);
            let got = [rng.next_u64(), rng.next_u64(), rng.next_u64(), rng.next_u64()];
            assert_eq!(got, expected, "stream({master}, {index})");
        }
    }

    #[test]
    fn permutation_is_a_permutation_and_deterministic() {
        let p = permutation(42, 3, 20);
        let mut sorted = p.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
        assert_eq!(p, permutation(42, 3, 20));
        assert_ne!(p, permutation(42, 4, 20), "distinct counters → distinct streams");
    }

    #[test]
    fn permutation_edge_sizes() {
        assert_eq!(permutation(0, 0, 0), Vec::<usize>::new());
        assert_eq!(permutation(0, 0, 1), vec![0]);
    }

    #[test]
    fn uniform_index_covers_small_range_uniformly() {
        // Chi-squared-free sanity: all residues of a small bound appear with
        // frequencies within 5% of uniform over many draws.
        let mut rng = stream(1, 1);
        let bound = 7u64;
        let mut counts = [0usize; 7];
        let draws = 70_000;
        for _ in 0..draws {
            counts[uniform_index(&mut rng, bound) as usize] += 1;
        }
        let expect = draws as f64 / bound as f64;
        for &c in &counts {
            assert!((c as f64 - expect).abs() < 0.05 * expect, "counts {counts:?}");
        }
    }
}
