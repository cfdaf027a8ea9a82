//! Reproducible pseudo-randomness.
//!
//! All randomness comes from PCG-XSH-RR 64/32 (`Pcg32`) with state `seed`
//! and the PCG default stream `0x0a02_bdbf_7bb3_c0a7`, so streams can be
//! regenerated bit-exactly by other implementations. Integers in `[0, n)` are
//! drawn as `(u32 * n) >> 32` (multiply-shift, no rejection).

use rand_core::Rng;
use rand_pcg::Pcg32;

pub const PCG_STREAM: u64 = 0x0a02_bdbf_7bb3_c0a7;

pub fn pcg32(seed: u64) -> Pcg32 {
    Pcg32::new(seed, PCG_STREAM)
}

/// Uniform in `[0, 1)` with 32 bits of resolution.
pub fn uniform01(rng: &mut Pcg32) -> f64 {
    f64::from(rng.next_u32()) / 4_294_967_296.0
}

/// Uniform in `[-1, 1)`.
pub fn uniform_symmetric(rng: &mut Pcg32) -> f64 {
    2.0 * uniform01(rng) - 1.0
}

/// Integer in `[0, n)`; `n` must fit in 32 bits.
pub fn below(rng: &mut Pcg32, n: usize) -> usize {
    debug_assert!(n > 0 && n <= u32::MAX as usize + 1);
    ((u64::from(rng.next_u32()) * n as u64) >> 32) as usize
}

/// Fisher-Yates shuffle of `0..n`, swapping position `i` (from `n-1` down to
/// 1) with `below(i + 1)`.
pub fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = pcg32(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = below(&mut rng, i + 1);
        idx.swap(i, j);
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_reproducible() {
        let mut rng = pcg32(42);
        let first: Vec<u32> = (0..3).map(|_| rng.next_u32()).collect();
        let mut again = pcg32(42);
        let second: Vec<u32> = (0..3).map(|_| again.next_u32()).collect();
        assert_eq!(first, second);
    }

    #[test]
    fn shuffle_is_permutation() {
        let mut p = shuffled_indices(100, 7);
        p.sort_unstable();
        assert_eq!(p, (0..100).collect::<Vec<_>>());
    }
}
