//! The one random stream used everywhere: xoshiro256++ seeded through
//! splitmix64, plus a fixed Fisher-Yates shuffle so index permutations can be
//! reproduced outside this crate.

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Prng = Xoshiro256PlusPlus;

/// Generator for `seed`; the 256-bit state is four consecutive splitmix64
/// outputs.
pub fn prng(seed: u64) -> Prng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Uniform index in `0..n` as `(next_u64 * n) >> 64`.
pub fn below(rng: &mut Prng, n: usize) -> usize {
    ((u128::from(rng.next_u64()) * n as u128) >> 64) as usize
}

/// Fisher-Yates, swapping position `i` (from `len - 1` down to 1) with
/// `below(i + 1)`.
pub fn shuffle<T>(items: &mut [T], rng: &mut Prng) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i + 1);
        items.swap(i, j);
    }
}

/// Uniform in `[0, 1)` with 53 random bits.
pub fn unit(rng: &mut Prng) -> f64 {
    rng.gen::<f64>()
}

/// Uniform in `[lo, hi)`.
pub fn uniform(rng: &mut Prng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}
