#![allow(dead_code)]

pub mod oracle;

use qmms_core::FiniteQMMSpace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random quasi-metric space: positive, possibly asymmetric distances.
pub fn random_dense(rng: &mut ChaCha8Rng, n: usize, asym: bool) -> FiniteQMMSpace {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.05 + 2.0 * rng.random::<f64>();
            d[i][j] = v;
            d[j][i] = if asym { v * (1.0 + rng.random::<f64>()) } else { v };
        }
    }
    let mu = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    FiniteQMMSpace::from_dense(None, d, mu).unwrap()
}

pub fn random_u(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect()
}
