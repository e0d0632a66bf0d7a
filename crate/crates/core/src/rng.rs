//! Seeded randomness with stream splitting.
//!
//! Every random quantity is read from a ChaCha8 keystream derived from the
//! 64-bit user seed. The 64-bit ChaCha stream id separates independent
//! purposes, and within a stream the block counter gives random access, so
//! any consumer can seek to its own slice without replaying the others.
//!
//! Layout:
//! * stream `LABELS + v` holds the `d` label coins of vertex `v`;
//! * stream `NOISE` holds one `u64` per unordered pair, pair `(u, v)` with
//!   `u < v` at word offset `2 * pair_index(n, u, v)`;
//! * the remaining named streams serve adversaries, splits and tuple draws.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LABELS: u64 = 0;
pub const NOISE: u64 = 1 << 62;
pub const DENSIFY: u64 = NOISE + 1;
pub const ADVERSARY: u64 = NOISE + 2;
pub const SPLIT: u64 = NOISE + 3;
pub const TUPLES: u64 = NOISE + 4;
pub const PLANT: u64 = NOISE + 5;
pub const HEURISTIC: u64 = NOISE + 6;
pub const EXPERIMENT: u64 = NOISE + 7;

/// Generator positioned at the start of `stream`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(0);
    rng
}

/// Index of the unordered pair `u < v` in row-major upper-triangular order.
pub fn pair_index(n: usize, u: usize, v: usize) -> u64 {
    debug_assert!(u < v && v < n);
    let (n, u, v) = (n as u64, u as u64, v as u64);
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Uniform double in `[0, 1)` with 53 random bits.
pub fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential reader over the per-pair noise values of one row.
///
/// `row(seed, n, u)` yields the uniforms of pairs `(u, u+1), …, (u, n-1)`.
pub struct PairNoise {
    rng: ChaCha8Rng,
}

impl PairNoise {
    pub fn row(seed: u64, stream_id: u64, n: usize, u: usize) -> Self {
        let mut rng = stream(seed, stream_id);
        if u + 1 < n {
            rng.set_word_pos(2 * pair_index(n, u, u + 1) as u128);
        }
        PairNoise { rng }
    }

    pub fn next(&mut self) -> f64 {
        unit(&mut self.rng)
    }
}

/// The noise uniform of a single pair, by random access.
pub fn pair_uniform(seed: u64, stream_id: u64, n: usize, u: usize, v: usize) -> f64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    let mut rng = stream(seed, stream_id);
    rng.set_word_pos(2 * pair_index(n, a, b) as u128);
    unit(&mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_is_dense_and_ordered() {
        let n = 7;
        let mut expect = 0;
        for u in 0..n {
            for v in u + 1..n {
                assert_eq!(pair_index(n, u, v), expect);
                expect += 1;
            }
        }
    }

    #[test]
    fn row_reader_matches_random_access() {
        let (seed, n) = (99, 13);
        for u in 0..n {
            let mut row = PairNoise::row(seed, NOISE, n, u);
            for v in u + 1..n {
                assert_eq!(row.next(), pair_uniform(seed, NOISE, n, u, v));
            }
        }
    }

    #[test]
    fn rows_continue_each_other() {
        let (seed, n) = (5, 9);
        let mut flat = stream(seed, NOISE);
        for u in 0..n {
            let mut row = PairNoise::row(seed, NOISE, n, u);
            for _ in u + 1..n {
                assert_eq!(row.next(), unit(&mut flat));
            }
        }
    }
}
