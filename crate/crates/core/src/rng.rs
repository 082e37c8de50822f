//! Seeded random streams. Replicate `k` of a run with seed `s` always reads
//! ChaCha8 stream `k` keyed by `s`, independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn stream(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// `n` independent standard normals from stream `(seed, replicate)`.
pub fn normals(seed: u64, replicate: u64, n: usize) -> Vec<f64> {
    let mut rng = stream(seed, replicate);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}
