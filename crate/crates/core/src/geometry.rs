//! Measure-geometric diagnostics: separated sets and nets, infimal ball
//! mass `h(r)`, `(c, delta)`-doubling constants, doubling at infinity,
//! lower Ahlfors fits and the integrability functional
//! `sum_i mu_i / mu(B(x_i, r))`.
//!
//! All maxima and minima are exact over the points of the space. Parallel
//! loops collect into vectors before reducing so results do not depend on
//! scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::FiniteQMMSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetKind {
    MaximalSeparated,
    Net,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetResult {
    pub epsilon: f64,
    pub centers: Vec<usize>,
    pub kind: NetKind,
    /// `max_x min_c d(c, x) / epsilon`: below 1 on symmetric spaces, at most
    /// `C~_d` in general.
    pub cover_radius_factor: f64,
}

/// Greedy maximal `epsilon`-separated set, lowest index first. A point joins
/// when its distance to every chosen center is at least `epsilon` in both
/// directions.
pub fn greedy_separated(space: &FiniteQMMSpace, epsilon: f64) -> Result<NetResult> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParams("epsilon must be positive".into()));
    }
    let n = space.len();
    let centers: Vec<usize> = if space.is_line() {
        // sorted coordinates: the nearest earlier center is the last one
        let mut c = vec![0];
        for j in 1..n {
            if space.dist(*c.last().unwrap(), j) >= epsilon {
                c.push(j);
            }
        }
        c
    } else {
        let mut c: Vec<usize> = Vec::new();
        for j in 0..n {
            if c.iter().all(|&k| space.dist(k, j) >= epsilon && space.dist(j, k) >= epsilon) {
                c.push(j);
            }
        }
        c
    };
    let cover = cover_radius(space, &centers);
    Ok(NetResult { epsilon, centers, kind: NetKind::MaximalSeparated, cover_radius_factor: cover / epsilon })
}

/// `max_x min_{c in centers} d(c, x)`.
pub fn cover_radius(space: &FiniteQMMSpace, centers: &[usize]) -> f64 {
    let n = space.len();
    let per: Vec<f64> = if space.is_line() {
        (0..n)
            .into_par_iter()
            .map(|x| {
                let k = centers.partition_point(|&c| c < x);
                let mut best = f64::INFINITY;
                if k < centers.len() {
                    best = best.min(space.dist(centers[k], x));
                }
                if k > 0 {
                    best = best.min(space.dist(centers[k - 1], x));
                }
                best
            })
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|x| centers.iter().map(|&c| space.dist(c, x)).fold(f64::INFINITY, f64::min))
            .collect()
    };
    per.into_iter().fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverEntry {
    pub epsilon: f64,
    /// Size of the greedy maximal separated set at this scale.
    pub greedy_size: usize,
    /// Smallest net found at any scale `<= epsilon`; nonincreasing in epsilon.
    pub net_size: usize,
    /// `mu(X) / h(epsilon / (C_d C~_d))`, an upper bound for `greedy_size`.
    pub packing_bound: f64,
}

pub fn covering_profile(space: &FiniteQMMSpace, eps_grid: &[f64]) -> Result<Vec<CoverEntry>> {
    let mut order: Vec<usize> = (0..eps_grid.len()).collect();
    order.sort_by(|&a, &b| eps_grid[a].total_cmp(&eps_grid[b]));
    let sizes = eps_grid
        .par_iter()
        .map(|&e| greedy_separated(space, e).map(|r| r.centers.len()))
        .collect::<Result<Vec<_>>>()?;
    let scale = space.c_d() * space.c_tilde();
    let mut out: Vec<Option<CoverEntry>> = vec![None; eps_grid.len()];
    let mut running = usize::MAX;
    for i in order {
        running = running.min(sizes[i]);
        let e = eps_grid[i];
        out[i] = Some(CoverEntry {
            epsilon: e,
            greedy_size: sizes[i],
            net_size: running,
            packing_bound: space.total_mass() / h_value(space, e / scale),
        });
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// `h(r) = min_x mu(B(x, r))`.
pub fn h_value(space: &FiniteQMMSpace, r: f64) -> f64 {
    let masses: Vec<f64> = (0..space.len()).into_par_iter().map(|x| space.ball_mass(x, r)).collect();
    masses.into_iter().fold(f64::INFINITY, f64::min)
}

pub fn h_profile(space: &FiniteQMMSpace, r_grid: &[f64]) -> Vec<f64> {
    r_grid.iter().map(|&r| h_value(space, r)).collect()
}

/// `Delta_c(delta) = max_x mu(B(x, c delta)) / mu(B(x, delta))`.
pub fn doubling_constant(space: &FiniteQMMSpace, c: f64, delta: f64) -> Result<f64> {
    Ok(doubling_witness(space, c, delta)?.1)
}

/// Like [`doubling_constant`] but also returns the maximizing center.
pub fn doubling_witness(space: &FiniteQMMSpace, c: f64, delta: f64) -> Result<(usize, f64)> {
    if !(c >= 1.0) || !(delta > 0.0) {
        return Err(Error::InvalidParams("need c >= 1 and delta > 0".into()));
    }
    let ratios: Vec<f64> = (0..space.len())
        .into_par_iter()
        .map(|x| space.ball_mass(x, c * delta) / space.ball_mass(x, delta))
        .collect();
    let mut best = (0, ratios[0]);
    for (x, &r) in ratios.iter().enumerate() {
        if r > best.1 {
            best = (x, r);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationBound {
    pub k: u32,
    pub measured: f64,
    pub bound: f64,
}

/// Compares `Delta_{c'}(delta)` with `prod_{l=1..k} Delta_c(c' delta / c^l)`
/// where `k` is the least integer with `c^k >= c'`.
pub fn doubling_iteration_bound(space: &FiniteQMMSpace, c: f64, c_prime: f64, delta: f64) -> Result<IterationBound> {
    if !(c > 1.0) || !(c_prime >= 1.0) {
        return Err(Error::InvalidParams("need c > 1 and c' >= 1".into()));
    }
    let mut k = 1u32;
    while c.powi(k as i32) < c_prime {
        k += 1;
    }
    let measured = doubling_constant(space, c_prime, delta)?;
    let mut bound = 1.0;
    for l in 1..=k {
        bound *= doubling_constant(space, c, c_prime * delta / c.powi(l as i32))?;
    }
    Ok(IterationBound { k, measured, bound })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtInfinity {
    pub radii: Vec<f64>,
    /// `mu(X \ B(x0, R)) / mu(X \ B(x0, C_d R))` per radius.
    pub ratios: Vec<f64>,
    /// Minimum ratio over the grid (the liminf estimate).
    pub estimate: f64,
    pub divergent: bool,
}

/// Doubling at infinity around `x0` on an increasing grid of radii.
///
/// `divergent` is raised when the ratios are nondecreasing over the second
/// half of the grid and grow by at least a factor 10 across it.
pub fn doubling_at_infinity(space: &FiniteQMMSpace, x0: usize, radii: &[f64]) -> Result<AtInfinity> {
    if radii.is_empty() {
        return Err(Error::InvalidParams("radius grid is empty".into()));
    }
    let cd = space.c_d();
    let mut ratios = Vec::with_capacity(radii.len());
    for &r in radii {
        let outer = space.tail_mass(x0, cd * r);
        if outer <= 0.0 {
            return Err(Error::EmptyTail(cd * r));
        }
        ratios.push(space.tail_mass(x0, r) / outer);
    }
    let estimate = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let half = &ratios[ratios.len() / 2..];
    let divergent = half.len() >= 2 && half.windows(2).all(|w| w[1] >= w[0]) && half[half.len() - 1] >= 10.0 * half[0];
    Ok(AtInfinity { radii: radii.to_vec(), ratios, estimate, divergent })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AhlforsFit {
    pub s: f64,
    /// `min mu(B(x, r)) / r^s` over centers and the radius grid.
    pub b: f64,
    /// Largest `mu(B(x, 2r)) / mu(B(x, r))` seen on the grid.
    pub doubling_ratio: f64,
    /// `log2` of [`Self::doubling_ratio`].
    pub s_min: f64,
    /// `4^s`.
    pub doubdim_factor: f64,
    /// `max mu(B(x, lambda r)) / (lambda^s mu(B(x, r)))` over the grid and
    /// `lambda` in {1, 2, 4, 8}; the dimension condition holds on the grid
    /// when this stays below `doubdim_factor`.
    pub doubdim_ratio: f64,
}

pub fn ahlfors_lower_fit(space: &FiniteQMMSpace, r_grid: &[f64], s: f64) -> Result<AhlforsFit> {
    if r_grid.is_empty() || r_grid.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::InvalidParams("radius grid must lie in (0, 1]".into()));
    }
    let n = space.len();
    let rows: Vec<(f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut b = f64::INFINITY;
            let mut dbl: f64 = 1.0;
            let mut dd: f64 = 0.0;
            for &r in r_grid {
                let m = space.ball_mass(x, r);
                b = b.min(m / r.powf(s));
                dbl = dbl.max(space.ball_mass(x, 2.0 * r) / m);
                for lambda in [1.0f64, 2.0, 4.0, 8.0] {
                    dd = dd.max(space.ball_mass(x, lambda * r) / (lambda.powf(s) * m));
                }
            }
            (b, dbl, dd)
        })
        .collect();
    let b = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let doubling_ratio = rows.iter().map(|r| r.1).fold(1.0, f64::max);
    let doubdim_ratio = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(AhlforsFit { s, b, doubling_ratio, s_min: doubling_ratio.log2(), doubdim_factor: 4f64.powf(s), doubdim_ratio })
}

/// Per-point integrand `mu_i / mu(B(x_i, r))`.
pub fn integrand(space: &FiniteQMMSpace, r: f64) -> Vec<f64> {
    (0..space.len()).into_par_iter().map(|x| space.mu()[x] / space.ball_mass(x, r)).collect()
}

/// `sum_i mu_i / mu(B(x_i, r))`; at most `mu(X) / h(r)`.
pub fn integrability_functional(space: &FiniteQMMSpace, r: f64) -> f64 {
    integrand(space, r).iter().sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Integrable,
    Divergent,
    Undecided,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub r: f64,
    pub value: f64,
    /// `(T, partial sum over points with coordinate < T)`.
    pub truncation_curve: Vec<(f64, f64)>,
    pub last_doubling_increment: f64,
    pub last_decade_increment: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Truncation curve of the integrability functional on a line space.
///
/// Ball masses are taken in the full space, so the space should extend at
/// least `r` beyond the largest truncation. The verdict is `Integrable` when
/// the increment over the last doubling of `T` is below `tol`, `Divergent`
/// when the increment over the last decade exceeds `10 tol`.
pub fn integrability_curve(space: &FiniteQMMSpace, r: f64, truncations: &[f64], tol: f64) -> Result<IntegrabilityReport> {
    let coords = space.coords().ok_or_else(|| Error::InvalidParams("truncation curves need a line space".into()))?;
    if truncations.len() < 2 || truncations.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("need an increasing truncation schedule".into()));
    }
    let f = integrand(space, r);
    let mut curve = Vec::with_capacity(truncations.len());
    let mut acc = 0.0;
    let mut idx = 0;
    for &t in truncations {
        while idx < coords.len() && coords[idx] < t {
            acc += f[idx];
            idx += 1;
        }
        curve.push((t, acc));
    }
    let at = |t: f64| -> f64 {
        // partial sum at the largest schedule point <= t
        curve.iter().rev().find(|(s, _)| *s <= t).map_or(0.0, |p| p.1)
    };
    let (t_last, v_last) = *curve.last().unwrap();
    let last_doubling_increment = v_last - at(t_last / 2.0);
    let last_decade_increment = v_last - at(t_last / 10.0);
    let verdict = if last_doubling_increment < tol {
        Verdict::Integrable
    } else if last_decade_increment > 10.0 * tol {
        Verdict::Divergent
    } else {
        Verdict::Undecided
    };
    Ok(IntegrabilityReport {
        r,
        value: v_last,
        truncation_curve: curve,
        last_doubling_increment,
        last_decade_increment,
        tolerance: tol,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid10() -> FiniteQMMSpace {
        FiniteQMMSpace::from_line(None, (0..10).map(|i| i as f64 / 10.0).collect(), 1.0, vec![0.1; 10]).unwrap()
    }

    #[test]
    fn greedy_on_ten_grid() {
        let r = greedy_separated(&grid10(), 0.25).unwrap();
        assert_eq!(r.centers, vec![0, 3, 6, 9]);
        assert!(r.cover_radius_factor < 1.0);
        let dense = grid10().to_dense();
        assert_eq!(greedy_separated(&dense, 0.25).unwrap().centers, vec![0, 3, 6, 9]);
        assert_eq!(greedy_separated(&dense, 5.0).unwrap().centers, vec![0]);
        assert_eq!(greedy_separated(&dense, 0.01).unwrap().centers.len(), 10);
    }

    #[test]
    fn h_and_doubling_trivia() {
        let s = grid10();
        assert!((h_value(&s, 10.0) - s.total_mass()).abs() < 1e-15);
        assert_eq!(doubling_constant(&s, 1.0, 0.3).unwrap(), 1.0);
        let it = doubling_iteration_bound(&s, 2.0, 1.5, 0.2).unwrap();
        assert_eq!(it.k, 1);
        assert_eq!(it.bound, doubling_constant(&s, 2.0, 1.5 * 0.2 / 2.0).unwrap());
    }

    #[test]
    fn bounded_space_has_empty_tail() {
        assert!(matches!(doubling_at_infinity(&grid10(), 0, &[1.0]), Err(Error::EmptyTail(_))));
    }

    #[test]
    fn integrability_bounded_by_h() {
        let s = grid10();
        let v = integrability_functional(&s, 0.15);
        assert!(v <= s.total_mass() / h_value(&s, 0.15) * (1.0 + 1e-12));
    }

    #[test]
    fn covering_profile_is_monotone() {
        let s = grid10();
        let p = covering_profile(&s, &[0.5, 0.05, 0.25, 0.15]).unwrap();
        assert_eq!(p[1].net_size, 10);
        let mut sorted = p.clone();
        sorted.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        assert!(sorted.windows(2).all(|w| w[1].net_size <= w[0].net_size));
        for e in &p {
            assert!(e.greedy_size as f64 <= e.packing_bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn ahlfors_on_uniform_grid() {
        let n = 200;
        let s = FiniteQMMSpace::from_line(None, (0..n).map(|i| i as f64 / n as f64).collect(), 1.0, vec![1.0 / n as f64; n]).unwrap();
        let grid: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
        let fit = ahlfors_lower_fit(&s, &grid, 1.0).unwrap();
        assert!((fit.b - 1.0).abs() <= 1.0 / n as f64 * 20.0, "b = {}", fit.b);
    }
}
