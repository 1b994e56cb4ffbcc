//! Trading smoothness for size: a level-wise `alpha`-gradient of `w` becomes
//! a `beta`-gradient for `beta < alpha`. With `2^(-K) <= eps < 2^(-K+1)`:
//!
//! * `h_k = 2^beta 2^(k beta) |w|` for `k < K` (coarse pairs, `d >= 2^(-k-1)`)
//! * `h_k = eps^(alpha - beta) g_k` for `k >= K` (fine pairs, `d < eps`)

use super::{dyadic_level, space_levels, worst_violation, GradientSequence, FEASIBILITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::space::FiniteQMMSpace;

/// The split level `K` with `2^(-K) <= eps < 2^(-K+1)`.
pub fn split_level(eps: f64) -> i32 {
    dyadic_level(eps) + 1
}

pub fn downgrade_gradient(
    space: &FiniteQMMSpace,
    u_n: &[f64],
    u_m: &[f64],
    g_nm: &GradientSequence,
    alpha: f64,
    beta: f64,
    eps: f64,
) -> Result<GradientSequence> {
    let n = space.len();
    if u_n.len() != n || u_m.len() != n || g_nm.g.iter().any(|r| r.len() != n) {
        return Err(Error::Malformed("function or gradient does not match the space".into()));
    }
    if !(beta > 0.0 && beta < alpha) || !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParams("need 0 < beta < alpha and eps > 0".into()));
    }
    let w: Vec<f64> = u_n.iter().zip(u_m).map(|(a, b)| a - b).collect();
    if let (v, Some((i, j))) = worst_violation(space, &w, alpha, g_nm) {
        if v > FEASIBILITY_TOLERANCE {
            return Err(Error::InfeasibleInput(i, j));
        }
    }
    let big_k = split_level(eps);
    let levels = space_levels(space);
    let zero = vec![0.0; n];
    let g = levels
        .iter()
        .map(|&k| {
            if k < big_k {
                let f = 2f64.powf(beta) * 2f64.powf(k as f64 * beta);
                w.iter().map(|x| f * x.abs()).collect()
            } else {
                let f = eps.powf(alpha - beta);
                g_nm.at(k).unwrap_or(&zero).iter().map(|x| f * x).collect()
            }
        })
        .collect();
    Ok(GradientSequence { levels, g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{max_violation, min_gradient_besov};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn split_bookkeeping() {
        assert_eq!(split_level(1.0), 0);
        assert_eq!(split_level(0.3), 2);
        assert_eq!(split_level(0.15), split_level(0.3) + 1);
    }

    #[test]
    fn random_pairs_stay_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let coords: Vec<f64> = (0..5).map(|_| rng.random::<f64>() * 2.0).collect();
            let s = FiniteQMMSpace::from_line(None, coords, 1.0, vec![0.2; 5]).unwrap();
            let un: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
            let um: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
            let w: Vec<f64> = un.iter().zip(&um).map(|(a, b)| a - b).collect();
            let g = min_gradient_besov(&s, &w, 1.0, 2.0, 2.0).unwrap().optimal_g;
            let eps = rng.random::<f64>() + 0.01;
            let h = downgrade_gradient(&s, &un, &um, &g, 1.0, 0.5, eps).unwrap();
            assert!(max_violation(&s, &w, 0.5, &h) <= FEASIBILITY_TOLERANCE);
        }
    }

    #[test]
    fn rejects_infeasible_input() {
        let s = FiniteQMMSpace::from_line(None, vec![0.0, 1.0], 1.0, vec![0.5; 2]).unwrap();
        let g = GradientSequence::collapsed(vec![0.0, 0.0]);
        let e = downgrade_gradient(&s, &[0.0, 1.0], &[0.0, 0.0], &g, 1.0, 0.5, 0.5);
        assert!(matches!(e, Err(Error::InfeasibleInput(_, _))));
    }
}
