//! Input generators shared by the benchmarks.

use gasfc_core::neural::Seq;
use gasfc_core::synthetic::standard_normal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian random walk.
pub fn random_walk(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            x += standard_normal(&mut rng);
            x
        })
        .collect()
}

pub fn random_seq(steps: usize, features: usize, seed: u64) -> Seq {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Seq::from_vec(steps, features, (0..steps * features).map(|_| rng.gen_range(-1.0..1.0)).collect())
}
