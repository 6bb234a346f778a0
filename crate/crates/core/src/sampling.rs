//! Seeded pseudorandom rationals, vectors and cylinder functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::measure::{CylinderFunction, LevelVector};
use crate::numeric::{ratio, Rational};
use crate::shift::{Alphabet, Point};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a sub-case of a seeded run.
pub fn sub_rng(seed: u64, tag: &[u64]) -> ChaCha8Rng {
    let mut s = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &t in tag {
        s = s.rotate_left(17).wrapping_mul(0xbf58_476d_1ce4_e5b9) ^ t;
    }
    ChaCha8Rng::seed_from_u64(s)
}

/// `p/q` with `|p| ≤ 12`, `1 ≤ q ≤ 7`.
pub fn rational(rng: &mut impl Rng) -> Rational {
    ratio(rng.gen_range(-12..=12), rng.gen_range(1..=7))
}

pub fn level_vector(rng: &mut impl Rng, alphabet: Alphabet, level: usize) -> Result<LevelVector> {
    let len = alphabet.size().pow(level as u32 + 1);
    LevelVector::new(alphabet, level, (0..len).map(|_| rational(rng)).collect())
}

pub fn cylinder_function(
    rng: &mut impl Rng,
    alphabet: Alphabet,
    depth: usize,
) -> Result<CylinderFunction> {
    let cells = alphabet.size().pow(depth as u32);
    CylinderFunction::new(alphabet, depth, (0..cells).map(|_| rational(rng)).collect())
}

/// A uniformly drawn point of depth at most `max_depth`.
pub fn point(rng: &mut impl Rng, alphabet: Alphabet, max_depth: usize) -> Point {
    let n = alphabet.size() as u8;
    let d = rng.gen_range(0..=max_depth);
    let prefix = (0..d).map(|_| rng.gen_range(1..=n)).collect();
    Point::new(prefix, rng.gen_range(1..=n))
}

/// A word of the given length.
pub fn word(rng: &mut impl Rng, alphabet: Alphabet, len: usize) -> Vec<u8> {
    let n = alphabet.size() as u8;
    (0..len).map(|_| rng.gen_range(1..=n)).collect()
}
