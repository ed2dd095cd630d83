//! Deterministic sub-seed derivation.
//!
//! Samplers and experiment runners hand each independent unit of work its
//! own 64-bit seed derived from `(root seed, stream, index)` with a
//! SplitMix64 finalizer. Results are therefore a pure function of the root
//! seed and the unit's position, independent of execution order.

/// Derives the seed for item `index` of logical stream `stream`.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0xA0761D6478BD642F))
        .wrapping_add(index.wrapping_mul(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}
