//! Hölder bump functions separating two sets.
//!
//! With `sigma` the `beta`-power chain metric and `D = dist_sigma(E0, E1)`,
//! `Phi(x) = min(1, dist_sigma(x, E0) / D)` vanishes on `E0`, equals 1 on
//! `E1` and satisfies `|Phi(x) - Phi(y)| <= rho(x, y)^beta / D` because
//! `dist_sigma(., E0)` is 1-Lipschitz for `sigma = rho^beta`.

use serde::{Deserialize, Serialize};

use super::{min_gradient_besov, min_gradient_sobolev};
use crate::error::{Error, Result};
use crate::regularize::chain_metric;
use crate::space::{dist_between, FiniteQMMSpace};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BumpResult {
    pub phi: Vec<f64>,
    pub beta: f64,
    /// `dist_sigma(E0, E1)`
    pub dist_sigma: f64,
    /// `min(dist_d(E0, E1), dist_d(E1, E0))`
    pub dist_d: f64,
    /// Certified Hölder constant `1 / dist_sigma(E0, E1)`.
    pub holder_constant: f64,
    /// Measured `max |Phi(x) - Phi(y)| / rho(x, y)^beta`.
    pub holder_quotient: f64,
    pub witness: (usize, usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BumpNorms {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub sobolev: f64,
    pub besov: f64,
    /// `dist_d(E0, E1)^(-alpha) mu(X \ E0)^(1/p)`
    pub shape: f64,
}

pub fn bump(space: &FiniteQMMSpace, e0: &[usize], e1: &[usize], beta: f64) -> Result<BumpResult> {
    let n = space.len();
    if e0.is_empty() || e1.is_empty() {
        return Err(Error::EmptySet);
    }
    if e0.iter().chain(e1).any(|&i| i >= n) {
        return Err(Error::Malformed("set index out of range".into()));
    }
    if e0.iter().any(|i| e1.contains(i)) {
        return Err(Error::TouchingSets);
    }
    let chain = chain_metric(space, beta)?;
    let to_e0: Vec<f64> = (0..n).map(|x| e0.iter().map(|&e| chain.sigma(x, e)).fold(f64::INFINITY, f64::min)).collect();
    let dist_sigma = e1.iter().map(|&x| to_e0[x]).fold(f64::INFINITY, f64::min);
    if !(dist_sigma > 0.0) {
        return Err(Error::TouchingSets);
    }
    let mut phi: Vec<f64> = to_e0.iter().map(|&t| (t / dist_sigma).min(1.0)).collect();
    for &x in e1 {
        phi[x] = 1.0;
    }
    let mut holder_quotient = 0.0;
    let mut witness = (e0[0], e1[0]);
    for x in 0..n {
        for y in 0..n {
            if x != y {
                let q = (phi[x] - phi[y]).abs() / chain.sigma(x, y);
                if q > holder_quotient {
                    holder_quotient = q;
                    witness = (x, y);
                }
            }
        }
    }
    let dist_d = dist_between(space, e0, e1)?.min(dist_between(space, e1, e0)?);
    Ok(BumpResult { phi, beta, dist_sigma, dist_d, holder_constant: 1.0 / dist_sigma, holder_quotient, witness })
}

/// Computed Sobolev and Besov seminorms of the bump next to the shape
/// `dist_d(E0, E1)^(-alpha) mu(X \ E0)^(1/p)`.
pub fn bump_norms(space: &FiniteQMMSpace, b: &BumpResult, e0: &[usize], alpha: f64, p: f64, q: f64) -> Result<BumpNorms> {
    let sobolev = min_gradient_sobolev(space, &b.phi, alpha, p)?.seminorm;
    let besov = min_gradient_besov(space, &b.phi, alpha, p, q)?.seminorm;
    let outside: f64 = (0..space.len()).filter(|i| !e0.contains(i)).map(|i| space.mu()[i]).sum();
    let shape = b.dist_d.powf(-alpha) * outside.powf(1.0 / p);
    Ok(BumpNorms { alpha, p, q, sobolev, besov, shape })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clusters(scale: f64) -> FiniteQMMSpace {
        let c = vec![0.0, 0.1, 0.2, 3.0, 3.1, 3.3].into_iter().map(|x| x * scale).collect();
        FiniteQMMSpace::from_line(None, c, 1.0, vec![1.0; 6]).unwrap()
    }

    #[test]
    fn two_points_give_indicator() {
        let s = FiniteQMMSpace::from_line(None, vec![0.0, 1.0], 1.0, vec![0.5; 2]).unwrap();
        let b = bump(&s, &[0], &[1], 0.7).unwrap();
        assert_eq!(b.phi, vec![0.0, 1.0]);
    }

    #[test]
    fn witness_attains_constant() {
        let s = clusters(1.0);
        let b = bump(&s, &[0, 1, 2], &[3, 4, 5], 0.8).unwrap();
        assert!(b.holder_quotient <= b.holder_constant * (1.0 + 1e-12));
        assert!((b.holder_quotient - b.holder_constant).abs() <= 1e-12 * b.holder_constant);
    }

    #[test]
    fn rescaling_scales_constant() {
        let beta = 0.6;
        let a = bump(&clusters(1.0), &[0, 1, 2], &[3, 4, 5], beta).unwrap();
        let b = bump(&clusters(0.5), &[0, 1, 2], &[3, 4, 5], beta).unwrap();
        assert!((b.holder_constant / a.holder_constant - 2f64.powf(beta)).abs() < 1e-12);
    }

    #[test]
    fn overlapping_sets_rejected() {
        assert_eq!(bump(&clusters(1.0), &[0, 1], &[1], 1.0).unwrap_err(), Error::TouchingSets);
    }
}
