//! Seeded random streams.
//!
//! Every random decision in a run comes from a [`ChaCha8Rng`] derived from the
//! root seed and a `(generation, subproblem)` coordinate, so results do not
//! depend on the order in which subproblems are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream for subproblem `j` at `generation`: seed `root + generation * n + j`.
///
/// Generation 0 is the initialization phase; evolution generations start at 1.
pub fn stream(root: u64, generation: usize, population: usize, subproblem: usize) -> Rng {
    let offset = (generation as u64)
        .wrapping_mul(population as u64)
        .wrapping_add(subproblem as u64);
    ChaCha8Rng::seed_from_u64(root.wrapping_add(offset))
}

pub fn from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
