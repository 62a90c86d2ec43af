//! Seeded random streams.
//!
//! Every stochastic routine in the crate draws from ChaCha8 (the `rand_chacha`
//! implementation), a counter-based generator whose output is fixed across
//! platforms. Seeds are expanded with `SeedableRng::seed_from_u64`. Bounded
//! integers use Lemire's widening-multiply rejection so that permutations do
//! not depend on `rand`'s internal sampling algorithms.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name recorded in metadata for the generator in use.
pub const GENERATOR_NAME: &str = "chacha8/seed_from_u64/v1";

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform integer in `0..bound` (`bound > 0`).
pub fn below<R: RngCore>(rng: &mut R, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let m = (rng.next_u64() as u128) * (bound as u128);
        if (m as u64) >= threshold {
            return (m >> 64) as u64;
        }
    }
}

/// Uniform real in the open interval `(0, 1)`.
pub fn open01<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// In-place Fisher–Yates shuffle.
pub fn fisher_yates<T, R: RngCore>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}
