//! Power-chain regularization.
//!
//! For `beta > 0` the chain metric `sigma` is the shortest-path distance on
//! the complete graph with edge weights `d_sym(x, y)^beta`. It is a genuine
//! metric below `d_sym^beta`, and `rho = sigma^(1/beta)` is a symmetric
//! quasi-metric with `rho^beta` subadditive, hence `C_rho <= 2^(1/beta)`.
//! The distortion `max d_sym^beta / sigma` measures how far `rho` is from
//! `d`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{symmetrize, FiniteQMMSpace};

#[derive(Clone, Debug)]
pub struct ChainMetricResult {
    pub beta: f64,
    pub n: usize,
    /// Row-major `n x n` chain metric.
    pub sigma: Vec<f64>,
    pub distortion: f64,
    /// Row-major `n x n`, `sigma^(1/beta)`.
    pub rho: Vec<f64>,
}

impl ChainMetricResult {
    #[inline]
    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.n + j]
    }

    #[inline]
    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.n + j]
    }

    /// The regularized quasi-metric as a space carrying the given weights.
    pub fn rho_space(&self, space: &FiniteQMMSpace) -> Result<FiniteQMMSpace> {
        let dist = (0..self.n).map(|i| (0..self.n).map(|j| self.rho(i, j)).collect()).collect();
        FiniteQMMSpace::from_dense(Some(space.labels().to_vec()), dist, space.mu().to_vec())
    }

    /// `kappa` with `B_rho(x, r/kappa) ⊆ B_d(x, r) ⊆ B_rho(x, kappa r)`:
    /// the distortion root times the asymmetry constant of `d`.
    pub fn kappa(&self, space: &FiniteQMMSpace) -> f64 {
        self.distortion.powf(1.0 / self.beta) * space.c_tilde()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexProfile {
    pub betas: Vec<f64>,
    pub distortions: Vec<f64>,
    pub threshold: f64,
    /// Largest grid exponent whose distortion stays within the threshold.
    pub feasible_sup: Option<f64>,
}

pub const DEFAULT_THRESHOLD: f64 = 16.0;

/// `0.1 * 2^(k/8)` for `k = 0..=64`.
pub fn default_beta_grid() -> Vec<f64> {
    (0..=64).map(|k| 0.1 * 2f64.powf(k as f64 / 8.0)).collect()
}

pub fn chain_metric(space: &FiniteQMMSpace, beta: f64) -> Result<ChainMetricResult> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParams("beta must be positive".into()));
    }
    let sym = symmetrize(space);
    let n = sym.len();
    let mut direct = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                direct[i * n + j] = sym.dist(i, j).powf(beta);
            }
        }
    }
    let mut sigma = direct.clone();
    // one sweep is exact in real arithmetic; repeating until nothing moves
    // makes the triangle inequality hold for the rounded sums as well
    loop {
        let before = sigma.clone();
        for k in 0..n {
            let row_k: Vec<f64> = sigma[k * n..(k + 1) * n].to_vec();
            sigma.par_chunks_mut(n).for_each(|row| {
                let dik = row[k];
                for (j, v) in row.iter_mut().enumerate() {
                    let c = dik + row_k[j];
                    if c < *v {
                        *v = c;
                    }
                }
            });
        }
        if sigma == before {
            break;
        }
    }
    let mut distortion: f64 = 1.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                distortion = distortion.max(direct[i * n + j] / sigma[i * n + j]);
            }
        }
    }
    let rho = sigma.iter().map(|&s| if s == 0.0 { 0.0 } else { s.powf(1.0 / beta) }).collect();
    Ok(ChainMetricResult { beta, n, sigma, distortion, rho })
}

pub fn index_profile(space: &FiniteQMMSpace, betas: &[f64], threshold: f64) -> Result<IndexProfile> {
    if betas.is_empty() {
        return Err(Error::InvalidParams("beta grid is empty".into()));
    }
    let distortions = betas
        .par_iter()
        .map(|&b| chain_metric(space, b).map(|c| c.distortion))
        .collect::<Result<Vec<f64>>>()?;
    let feasible_sup = betas
        .iter()
        .zip(&distortions)
        .filter(|(_, &d)| d <= threshold)
        .map(|(&b, _)| b)
        .fold(None, |acc: Option<f64>, b| Some(acc.map_or(b, |a| a.max(b))));
    Ok(IndexProfile { betas: betas.to_vec(), distortions, threshold, feasible_sup })
}
