//! Seeded random streams.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`), which produces the same
//! stream on every platform. Normal variates use `rand_distr::StandardNormal`
//! (ziggurat). Problem data is drawn from stream 0 of a seed, initial points
//! from stream 1, so changing one never shifts the other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn problem_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_normals(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    StandardNormal.sample_iter(rng).take(len).collect()
}

/// `x_0` with i.i.d. standard normal entries.
pub fn initial_point(dimension: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    standard_normals(&mut rng, dimension)
}
