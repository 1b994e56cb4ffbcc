//! Total boundedness certificates and non-compactness witnesses for finite
//! function families.
//!
//! A finite family is trivially totally bounded, so everything here is about
//! the *quantitative* data: the partition, exceptional sets and step-function
//! net that certify an `eps`-net in `d_{L^0}`, the size of that net, the
//! modulus of equi-integrability, and explicit sequences whose members stay
//! far apart in `L^p` while their Hajłasz norms stay bounded.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{doubling_constant, greedy_separated};
use crate::norms::bump::bump;
use crate::norms::{lp_norm, max_violation, pointwise_sup_gradient, GradientSequence, FEASIBILITY_TOLERANCE};
use crate::regularize::{chain_metric, ChainMetricResult};
use crate::space::FiniteQMMSpace;

/// `sum mu |f - g| / (1 + |f - g|)`
pub fn l0_distance(f: &[f64], g: &[f64], mu: &[f64]) -> f64 {
    f.iter().zip(g).zip(mu).map(|((a, b), m)| {
        let t = (a - b).abs();
        m * t / (1.0 + t)
    }).sum()
}

fn check_family(space: &FiniteQMMSpace, family: &[Vec<f64>]) -> Result<()> {
    if family.iter().any(|f| f.len() != space.len() || f.iter().any(|v| !v.is_finite())) {
        return Err(Error::Malformed("family member does not match the space".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Fréchet certificate

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FrechetOptions {
    /// Scale `delta` in `d` below which members oscillate by less than the
    /// working tolerance off their exceptional sets; cells then have
    /// `d`-diameter below it.
    pub scale: Option<f64>,
    /// Bound on `|u|` off the exceptional sets (default `max |u|`).
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrechetCertificate {
    pub epsilon: f64,
    /// Working tolerance `eps / (1 + 2 mu(X))`.
    pub delta: f64,
    pub lambda: f64,
    /// `M = ceil(lambda / delta)`; net values are `delta m` with `|m| <= M`.
    pub m: i64,
    pub route: String,
    pub cell_radius: f64,
    pub cells: Vec<Vec<usize>>,
    pub exceptional: Vec<Vec<usize>>,
    pub exceptional_mass: Vec<f64>,
    /// Per member, the integer level `m_i` of every cell.
    pub net_codes: Vec<Vec<i64>>,
    pub l0_to_net: Vec<f64>,
    /// `#cells * ln(2M + 1)`
    pub log_net_bound: f64,
    pub distinct_net_members: usize,
    pub verified: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrechetRefusal {
    pub epsilon: f64,
    pub delta: f64,
    pub cells: usize,
    pub cell_radius: f64,
    pub member: usize,
    pub cell: usize,
    /// Points of the obstructing cell carrying its smallest and largest values.
    pub pair: (usize, usize),
    pub oscillation: f64,
    pub removal_needed: f64,
    pub removal_allowed: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FrechetOutcome {
    Certificate(FrechetCertificate),
    Refusal(FrechetRefusal),
}

/// Regularized metric used for the partition, with its equivalence constant
/// `kappa` (`rho / kappa <= d <= kappa rho`) and quasi-metric constant.
struct Regularized {
    chain: ChainMetricResult,
    kappa: f64,
    c_rho: f64,
    rho_space: FiniteQMMSpace,
}

fn regularize(space: &FiniteQMMSpace) -> Result<Regularized> {
    let c = space.c_d();
    let beta = if c > 1.0 { (1.0 / c.log2()).min(4.0) } else { 1.0 };
    let chain = chain_metric(space, beta)?;
    let kappa = exact_kappa(space, &chain);
    let rho_space = chain.rho_space(space)?;
    let c_rho = rho_space.c_d();
    Ok(Regularized { chain, kappa, c_rho, rho_space })
}

/// Smallest `kappa` with `rho / kappa <= d <= kappa rho` on all pairs.
pub fn exact_kappa(space: &FiniteQMMSpace, chain: &ChainMetricResult) -> f64 {
    let n = space.len();
    (0..n)
        .into_par_iter()
        .map(|x| {
            (0..n)
                .filter(|&y| y != x)
                .map(|y| {
                    let (d, r) = (space.dist(x, y), chain.rho(x, y));
                    (d / r).max(r / d)
                })
                .fold(1.0, f64::max)
        })
        .reduce(|| 1.0, f64::max)
}

/// `X_i = B_rho(x_i, r) minus earlier balls` around a maximal
/// `r`-separated set.
fn partition(reg: &Regularized, r: f64) -> Result<Vec<Vec<usize>>> {
    let n = reg.rho_space.len();
    let centers = greedy_separated(&reg.rho_space, r)?.centers;
    let mut owner = vec![usize::MAX; n];
    for (ci, &c) in centers.iter().enumerate() {
        for x in 0..n {
            if owner[x] == usize::MAX && (x == c || reg.chain.rho(c, x) < r) {
                owner[x] = ci;
            }
        }
    }
    let mut cells = vec![Vec::new(); centers.len()];
    for (x, &o) in owner.iter().enumerate() {
        debug_assert!(o != usize::MAX, "maximal separated sets cover");
        cells[o].push(x);
    }
    Ok(cells)
}

struct MemberFit {
    exceptional: Vec<usize>,
    mass: f64,
    /// cell with the largest forced removal and its extreme points
    worst: (usize, f64, (usize, usize), f64),
}

/// Optimal exceptional set for one member on a fixed partition: in each cell
/// keep the heaviest value window of width `< delta` inside `[-lambda, lambda]`.
fn fit_member(u: &[f64], mu: &[f64], cells: &[Vec<usize>], delta: f64, lambda: f64) -> MemberFit {
    let mut exceptional = Vec::new();
    let mut mass = 0.0;
    let mut worst = (0, -1.0, (0, 0), 0.0);
    for (ci, cell) in cells.iter().enumerate() {
        let mut pts: Vec<usize> = cell.iter().copied().filter(|&x| u[x].abs() <= lambda).collect();
        pts.sort_by(|&a, &b| u[a].total_cmp(&u[b]));
        let (mut best, mut best_lo, mut best_hi) = (0.0, 0, 0);
        let (mut hi, mut acc) = (0, 0.0);
        for lo in 0..pts.len() {
            while hi < pts.len() && u[pts[hi]] - u[pts[lo]] < delta {
                acc += mu[pts[hi]];
                hi += 1;
            }
            if acc > best {
                (best, best_lo, best_hi) = (acc, lo, hi);
            }
            acc -= mu[pts[lo]];
        }
        let kept: Vec<usize> = pts[best_lo..best_hi].to_vec();
        let mut removed = 0.0;
        for &x in cell {
            if !kept.contains(&x) {
                exceptional.push(x);
                removed += mu[x];
            }
        }
        mass += removed;
        if removed > worst.1 {
            let lo = *cell.iter().min_by(|&&a, &&b| u[a].total_cmp(&u[b])).unwrap();
            let hi = *cell.iter().max_by(|&&a, &&b| u[a].total_cmp(&u[b])).unwrap();
            worst = (ci, removed, (lo, hi), u[hi] - u[lo]);
        }
    }
    exceptional.sort_unstable();
    MemberFit { exceptional, mass, worst }
}

fn assemble(
    family: &[Vec<f64>],
    mu: &[f64],
    cells: Vec<Vec<usize>>,
    fits: Vec<MemberFit>,
    eps: f64,
    delta: f64,
    lambda: f64,
    route: &str,
    cell_radius: f64,
) -> FrechetCertificate {
    let m = (lambda / delta).ceil().max(1.0) as i64;
    let n = mu.len();
    let mut net_codes = Vec::with_capacity(family.len());
    let mut l0_to_net = Vec::with_capacity(family.len());
    let mut verified = true;
    for (u, fit) in family.iter().zip(&fits) {
        let mut in_e = vec![false; n];
        for &x in &fit.exceptional {
            in_e[x] = true;
        }
        let codes: Vec<i64> = cells
            .iter()
            .map(|cell| cell.iter().find(|&&x| !in_e[x]).map_or(0, |&x| (u[x] / delta).floor() as i64))
            .collect();
        let mut step = vec![0.0; n];
        for (cell, &c) in cells.iter().zip(&codes) {
            verified &= c.abs() <= m;
            for &x in cell {
                step[x] = delta * c as f64;
            }
        }
        let dist = l0_distance(u, &step, mu);
        verified &= dist < eps && fit.mass < delta;
        net_codes.push(codes);
        l0_to_net.push(dist);
    }
    let mut distinct = net_codes.clone();
    distinct.sort();
    distinct.dedup();
    let log_net_bound = cells.len() as f64 * ((2 * m + 1) as f64).ln();
    verified &= (distinct.len() as f64).ln() <= log_net_bound + 1e-12;
    FrechetCertificate {
        epsilon: eps,
        delta,
        lambda,
        m,
        route: route.into(),
        cell_radius,
        cells,
        exceptional_mass: fits.iter().map(|f| f.mass).collect(),
        exceptional: fits.into_iter().map(|f| f.exceptional).collect(),
        net_codes,
        l0_to_net,
        log_net_bound,
        distinct_net_members: distinct.len(),
        verified,
    }
}

/// Searches a partition into at most `cell_budget` regularized balls on
/// which every member is `delta`-flat off an exceptional set of mass
/// `< delta`, `delta = eps / (1 + 2 mu(X))`. On success the step-function
/// net is built and checked member by member; otherwise the obstruction of
/// the finest admissible partition is reported.
pub fn frechet_certify(
    space: &FiniteQMMSpace,
    family: &[Vec<f64>],
    eps: f64,
    cell_budget: usize,
    opts: &FrechetOptions,
) -> Result<FrechetOutcome> {
    check_family(space, family)?;
    if !(eps > 0.0) || cell_budget == 0 {
        return Err(Error::InvalidParams("need eps > 0 and a positive cell budget".into()));
    }
    let mu = space.mu();
    let delta = eps / (1.0 + 2.0 * space.total_mass());
    let lambda = opts
        .lambda
        .unwrap_or_else(|| family.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max))
        .max(f64::MIN_POSITIVE);
    let reg = regularize(space)?;

    let try_radius = |r: f64| -> Result<Option<(Vec<Vec<usize>>, Vec<MemberFit>)>> {
        let cells = partition(&reg, r)?;
        if cells.len() > cell_budget {
            return Ok(None);
        }
        let fits: Vec<MemberFit> = family.par_iter().map(|u| fit_member(u, mu, &cells, delta, lambda)).collect();
        Ok(Some((cells, fits)))
    };
    let ok = |fits: &[MemberFit]| fits.iter().all(|f| f.mass < delta);

    if let Some(scale) = opts.scale {
        // same cell => rho < C_rho r => d < kappa C_rho r = scale
        let r = scale / (reg.kappa * reg.c_rho);
        if let Some((cells, fits)) = try_radius(r)? {
            if ok(&fits) {
                return Ok(FrechetOutcome::Certificate(assemble(family, mu, cells, fits, eps, delta, lambda, "sobolev_scale", r)));
            }
        }
    }
    let top = (0..space.len()).map(|x| (0..space.len()).map(|y| reg.chain.rho(x, y)).fold(0.0, f64::max)).fold(0.0, f64::max);
    let mut r = top * (1.0 + 1e-9) + f64::MIN_POSITIVE;
    let mut last: Option<(f64, Vec<Vec<usize>>, Vec<MemberFit>)> = None;
    for _ in 0..200 {
        match try_radius(r)? {
            None => break,
            Some((cells, fits)) => {
                if ok(&fits) {
                    return Ok(FrechetOutcome::Certificate(assemble(family, mu, cells, fits, eps, delta, lambda, "radius_search", r)));
                }
                let singletons = cells.len() == space.len();
                last = Some((r, cells, fits));
                if singletons {
                    break;
                }
            }
        }
        r /= 2.0;
    }
    let (r, cells, fits) = match last {
        Some(l) => l,
        None => return Err(Error::InvalidParams("cell budget admits no partition".into())),
    };
    let (member, fit) = fits.iter().enumerate().max_by(|a, b| a.1.mass.total_cmp(&b.1.mass)).unwrap();
    let (cell, _, pair, oscillation) = fit.worst;
    Ok(FrechetOutcome::Refusal(FrechetRefusal {
        epsilon: eps,
        delta,
        cells: cells.len(),
        cell_radius: r,
        member,
        cell,
        pair,
        oscillation,
        removal_needed: fit.mass,
        removal_allowed: delta,
    }))
}

// ---------------------------------------------------------------------------
// Exceptional sets from Hajłasz gradients

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExceptionalSet {
    pub set: Vec<usize>,
    pub mu_mass: f64,
    pub nu_mass: f64,
    /// small mass, flat on `delta`-close pairs, bounded by `lambda`
    pub conditions: [bool; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SobolevSets {
    pub epsilon: f64,
    /// `sup (||u||_p + ||g||_p)` over the family
    pub m: f64,
    pub eta: f64,
    /// `M 2^(2 + 1/p) / eta^(1/p)`
    pub lambda: f64,
    /// `(eps / (2 lambda))^(1/alpha)`
    pub delta: f64,
    pub members: Vec<ExceptionalSet>,
}

/// `E(u) = {max(|u|, g) > lambda}` with Chebyshev-calibrated `lambda`.
/// With a second weight `nu <= C mu`, `eta = eps / C` transfers smallness.
pub fn sobolev_exceptional_sets(
    space: &FiniteQMMSpace,
    family: &[Vec<f64>],
    gradients: &[Option<Vec<f64>>],
    alpha: f64,
    p: f64,
    eps: f64,
    nu: Option<&[f64]>,
) -> Result<SobolevSets> {
    check_family(space, family)?;
    if !(alpha > 0.0 && p > 0.0 && p.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParams("need alpha, p, eps > 0 with p finite".into()));
    }
    let n = space.len();
    let mu = space.mu();
    let nu = nu.unwrap_or(mu);
    if nu.len() != n {
        return Err(Error::Malformed("nu does not match the space".into()));
    }
    let c = nu.iter().zip(mu).map(|(a, b)| a / b).fold(0.0, f64::max);
    let eta = if c > 0.0 { eps / c } else { eps };
    let mut grads = Vec::with_capacity(family.len());
    for (i, u) in family.iter().enumerate() {
        let g = match gradients.get(i) {
            Some(Some(g)) if g.len() == n => g.clone(),
            _ => return Err(Error::MissingGradient(i)),
        };
        let scale = u.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let grad = GradientSequence::collapsed(g.clone());
        if max_violation(space, u, alpha, &grad) > FEASIBILITY_TOLERANCE * scale {
            let (_, pair) = crate::norms::worst_violation(space, u, alpha, &grad);
            let (a, b) = pair.unwrap_or((i, i));
            return Err(Error::InfeasibleGradient(a, b));
        }
        grads.push(g);
    }
    let m = family.iter().zip(&grads).map(|(u, g)| lp_norm(u, p, mu) + lp_norm(g, p, mu)).fold(0.0, f64::max);
    let lambda = if m > 0.0 { m * 2f64.powf(2.0 + 1.0 / p) / eta.powf(1.0 / p) } else { 1.0 };
    let delta = (eps / (2.0 * lambda)).powf(1.0 / alpha);
    let members = family
        .par_iter()
        .zip(grads.par_iter())
        .map(|(u, g)| {
            let inside: Vec<bool> = (0..n).map(|x| u[x].abs().max(g[x]) > lambda).collect();
            let set: Vec<usize> = (0..n).filter(|&x| inside[x]).collect();
            let mu_mass: f64 = set.iter().map(|&x| mu[x]).sum();
            let nu_mass: f64 = set.iter().map(|&x| nu[x]).sum();
            let mut flat = true;
            for x in (0..n).filter(|&x| !inside[x]) {
                for y in (0..n).filter(|&y| !inside[y] && y != x) {
                    if space.dist(x, y) < delta && (u[x] - u[y]).abs() >= eps {
                        flat = false;
                    }
                }
            }
            let bounded = (0..n).all(|x| inside[x] || u[x].abs() <= lambda);
            ExceptionalSet { set, mu_mass, nu_mass, conditions: [nu_mass < eps, flat, bounded] }
        })
        .collect();
    Ok(SobolevSets { epsilon: eps, m, eta, lambda, delta, members })
}

// ---------------------------------------------------------------------------
// Equi-integrability

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquiVerdict {
    EquiIntegrable,
    NotEquiIntegrable,
    Undecided,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquiModulus {
    pub p: f64,
    pub deltas: Vec<f64>,
    /// Value of an admissible set (lower estimate of the supremum).
    pub greedy: Vec<f64>,
    /// Fractional knapsack relaxation (upper bound of the supremum).
    pub fractional: Vec<f64>,
    pub tolerance: f64,
    pub verdict: EquiVerdict,
}

/// `(greedy, fractional)` for `sup_{mu(A) <= delta} sum_A mu |f|^p`.
fn knapsack(f: &[f64], mu: &[f64], p: f64, delta: f64) -> (f64, f64) {
    let mut order: Vec<usize> = (0..f.len()).collect();
    let dens: Vec<f64> = f.iter().map(|v| v.abs().powf(p)).collect();
    order.sort_by(|&a, &b| dens[b].total_cmp(&dens[a]));
    let (mut greedy, mut used) = (0.0, 0.0);
    let (mut frac, mut room) = (0.0, delta);
    let mut best_single: f64 = 0.0;
    for &i in &order {
        if mu[i] <= delta {
            best_single = best_single.max(dens[i] * mu[i]);
        }
        if used + mu[i] <= delta {
            used += mu[i];
            greedy += dens[i] * mu[i];
        }
        if room > 0.0 {
            let take = mu[i].min(room);
            frac += dens[i] * take;
            room -= take;
        }
    }
    (greedy.max(best_single), frac)
}

/// `omega(delta) = sup_f sup_{mu(A) <= delta} int_A |f|^p`, sandwiched
/// between an admissible choice and the fractional relaxation. The verdict
/// at the smallest `delta` is positive only when the upper bound is below
/// `tol`, negative only when an admissible set reaches `tol`.
pub fn equi_integrability_modulus(family: &[Vec<f64>], mu: &[f64], p: f64, deltas: &[f64], tol: f64) -> Result<EquiModulus> {
    if !(p > 0.0 && p.is_finite()) || deltas.iter().any(|&d| !(d >= 0.0)) {
        return Err(Error::InvalidParams("need finite p > 0 and nonnegative deltas".into()));
    }
    if family.iter().any(|f| f.len() != mu.len()) {
        return Err(Error::Malformed("family member does not match the weights".into()));
    }
    let per: Vec<(f64, f64)> = deltas
        .par_iter()
        .map(|&d| {
            family.iter().map(|f| knapsack(f, mu, p, d)).fold((0.0f64, 0.0f64), |a, b| (a.0.max(b.0), a.1.max(b.1)))
        })
        .collect();
    let greedy: Vec<f64> = per.iter().map(|t| t.0).collect();
    let fractional: Vec<f64> = per.iter().map(|t| t.1).collect();
    let verdict = match deltas.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) {
        None => EquiVerdict::Undecided,
        Some((i, _)) if fractional[i] < tol => EquiVerdict::EquiIntegrable,
        Some((i, _)) if greedy[i] >= tol => EquiVerdict::NotEquiIntegrable,
        Some(_) => EquiVerdict::Undecided,
    };
    Ok(EquiModulus { p, deltas: deltas.to_vec(), greedy, fractional, tolerance: tol, verdict })
}

// ---------------------------------------------------------------------------
// Key inequality

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KeyInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub kappa: f64,
    pub holds: bool,
}

/// Both sides of
/// `int_D |u|^p dnu <= 4^p k^(ap) r^(ap) ||g||^p_{L^p(nu)}
///   + int_X (4^p k^(ap) r^(ap) g^p(y) + 2^p |u(y)|^p)
///     int_D chi_{B_rho(y,r)}(x) / mu(B_rho(x,r)) dnu(x) dmu(y)`
/// as exact finite sums, with `kappa` the exact equivalence constant
/// between `d` and the chain metric `rho`.
#[allow(clippy::too_many_arguments)]
pub fn key_inequality_check(
    space: &FiniteQMMSpace,
    u: &[f64],
    g: &[f64],
    d_set: &[usize],
    r: f64,
    alpha: f64,
    p: f64,
    chain: &ChainMetricResult,
    nu: Option<&[f64]>,
) -> Result<KeyInequality> {
    let n = space.len();
    if u.len() != n || g.len() != n || chain.n != n || d_set.iter().any(|&x| x >= n) {
        return Err(Error::Malformed("inputs do not match the space".into()));
    }
    if !(r > 0.0 && alpha > 0.0 && p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParams("need r, alpha, p > 0".into()));
    }
    let mu = space.mu();
    let nu = nu.unwrap_or(mu);
    let scale = u.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let grad = GradientSequence::collapsed(g.to_vec());
    let (viol, pair) = crate::norms::worst_violation(space, u, alpha, &grad);
    if viol > FEASIBILITY_TOLERANCE * scale {
        let (a, b) = pair.unwrap();
        return Err(Error::InfeasibleGradient(a, b));
    }
    let kappa = exact_kappa(space, chain);
    let c = 4f64.powf(p) * kappa.powf(alpha * p) * r.powf(alpha * p);
    let ball_mass: Vec<f64> = (0..n).map(|x| (0..n).filter(|&y| chain.rho(x, y) < r).map(|y| mu[y]).sum()).collect();
    let lhs: f64 = d_set.iter().map(|&x| u[x].abs().powf(p) * nu[x]).sum();
    let g_nu: f64 = (0..n).map(|x| g[x].powf(p) * nu[x]).sum();
    let inner: Vec<f64> =
        (0..n).map(|y| d_set.iter().filter(|&&x| chain.rho(y, x) < r).map(|&x| nu[x] / ball_mass[x]).sum()).collect();
    let outer: f64 = (0..n).map(|y| (c * g[y].powf(p) + 2f64.powf(p) * u[y].abs().powf(p)) * inner[y] * mu[y]).sum();
    let rhs = c * g_nu + outer;
    Ok(KeyInequality { lhs, rhs, kappa, holds: lhs <= rhs })
}

// ---------------------------------------------------------------------------
// Witness sequences

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    SeparatedBumps,
    TailBumps,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessSequence {
    pub recipe: Recipe,
    pub functions: Vec<Vec<f64>>,
    /// `min_{k != l} ||f_k - f_l||_p^p`
    pub pairwise_lp_gap: f64,
    /// `max_k (||f_k||_p + ||g_k||_p)` for feasible `alpha`-gradients `g_k`.
    pub norm_bound: f64,
    pub member_norms: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparatedWitness {
    pub sequence: WitnessSequence,
    pub centers: Vec<usize>,
    pub separation: f64,
    /// `B(x_k, delta)` misses `B(x_l, C_d delta)` for all `k != l`.
    pub disjoint_balls: bool,
    /// Measured `Delta_{C_d}(delta)`.
    pub doubling: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailWitness {
    pub sequence: WitnessSequence,
    pub radii: Vec<f64>,
    /// `int_{X \ B(x0, C_d R)} |f_R|^p dmu`, one per radius.
    pub tail_masses: Vec<f64>,
    /// `mu(X \ B(x0, R)) / mu(X \ B(x0, C_d R))`
    pub ratios: Vec<f64>,
}

fn min_pairwise_gap(fs: &[Vec<f64>], mu: &[f64], p: f64) -> f64 {
    let mut gap = f64::INFINITY;
    for k in 0..fs.len() {
        for l in k + 1..fs.len() {
            let d: f64 = fs[k].iter().zip(&fs[l]).zip(mu).map(|((a, b), m)| m * (a - b).abs().powf(p)).sum();
            gap = gap.min(d);
        }
    }
    gap
}

/// Full `M^{alpha,p}` norm bound from the pointwise supremum gradient,
/// which is feasible and vanishes where `f` does.
fn feasible_norm(space: &FiniteQMMSpace, f: &[f64], alpha: f64, p: f64) -> f64 {
    let zeros: Vec<usize> = (0..f.len()).filter(|&x| f[x] == 0.0).collect();
    let g = pointwise_sup_gradient(space, f, alpha, &zeros);
    lp_norm(f, p, space.mu()) + lp_norm(&g, p, space.mu())
}

/// Normalized bumps `f_j = Phi_j / mu(B(x_j, delta))^(1/p)` around points that
/// are pairwise `C~_d C_d^2 delta`-separated, with `Phi_j = 1` on
/// `B(x_j, delta)` and `0` off `B(x_j, C_d delta)`.
pub fn separated_bump_witness(space: &FiniteQMMSpace, delta: f64, alpha: f64, p: f64) -> Result<SeparatedWitness> {
    if !(delta > 0.0 && alpha > 0.0 && p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParams("need delta, alpha, p > 0".into()));
    }
    let (c, ct) = (space.c_d(), space.c_tilde());
    let separation = ct * c * c * delta;
    let centers = greedy_separated(space, separation)?.centers;
    if centers.len() < 2 {
        return Err(Error::NoSeparatedPair);
    }
    let n = space.len();
    let beta = if c > 1.0 { 1.0 / c.log2() } else { 1.0 };
    let functions = centers
        .par_iter()
        .map(|&x| {
            let inner = space.ball(x, delta).members;
            let outer = space.ball(x, c * delta).members;
            let e0: Vec<usize> = (0..n).filter(|y| !outer.contains(y)).collect();
            let phi = if e0.is_empty() { vec![1.0; n] } else { bump(space, &e0, &inner, beta)?.phi };
            let scale = space.set_mass(&inner).powf(-1.0 / p);
            Ok(phi.into_iter().map(|v| v * scale).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut disjoint_balls = true;
    for &k in &centers {
        let inner = space.ball(k, delta).members;
        for &l in centers.iter().filter(|&&l| l != k) {
            let outer = space.ball(l, c * delta).members;
            disjoint_balls &= !inner.iter().any(|y| outer.contains(y));
        }
    }
    let member_norms: Vec<f64> = functions.par_iter().map(|f| feasible_norm(space, f, alpha, p)).collect();
    let sequence = WitnessSequence {
        recipe: Recipe::SeparatedBumps,
        pairwise_lp_gap: min_pairwise_gap(&functions, space.mu(), p),
        norm_bound: member_norms.iter().copied().fold(0.0, f64::max),
        member_norms,
        functions,
    };
    Ok(SeparatedWitness { sequence, centers, separation, disjoint_balls, doubling: doubling_constant(space, c, delta)? })
}

/// Normalized tail bumps `f_R = Phi_R / mu(X \ B(x0, C_d R))^(1/p)` with
/// `Phi_R = 0` on `B(x0, R)` and `1` off `B(x0, C_d R)`.
pub fn tail_bump_witness(space: &FiniteQMMSpace, x0: usize, radii: &[f64], alpha: f64, p: f64) -> Result<TailWitness> {
    if radii.is_empty() || radii.iter().any(|&r| !(r >= 1.0)) {
        return Err(Error::InvalidParams("radii must be >= 1".into()));
    }
    if !(alpha > 0.0 && p > 0.0 && p.is_finite()) || x0 >= space.len() {
        return Err(Error::InvalidParams("need alpha, p > 0 and a valid base point".into()));
    }
    let n = space.len();
    let c = space.c_d();
    let beta = if c > 1.0 { 1.0 / c.log2() } else { 1.0 };
    let mut functions = Vec::new();
    let mut tail_masses = Vec::new();
    let mut ratios = Vec::new();
    for &r in radii {
        let near = space.ball(x0, r).members;
        let far_ball = space.ball(x0, c * r).members;
        let e1: Vec<usize> = (0..n).filter(|y| !far_ball.contains(y)).collect();
        if e1.is_empty() {
            return Err(Error::EmptyTail(c * r));
        }
        let outside_near: f64 = space.total_mass() - space.set_mass(&near);
        let tail = space.set_mass(&e1);
        let phi = bump(space, &near, &e1, beta)?.phi;
        let scale = tail.powf(-1.0 / p);
        let f: Vec<f64> = phi.into_iter().map(|v| v * scale).collect();
        tail_masses.push(e1.iter().map(|&x| f[x].abs().powf(p) * space.mu()[x]).sum());
        ratios.push(outside_near / tail);
        functions.push(f);
    }
    let member_norms: Vec<f64> = functions.par_iter().map(|f| feasible_norm(space, f, alpha, p)).collect();
    let sequence = WitnessSequence {
        recipe: Recipe::TailBumps,
        pairwise_lp_gap: if functions.len() > 1 { min_pairwise_gap(&functions, space.mu(), p) } else { f64::NAN },
        norm_bound: member_norms.iter().copied().fold(0.0, f64::max),
        member_norms,
        functions,
    };
    Ok(TailWitness { sequence, radii: radii.to_vec(), tail_masses, ratios })
}

// ---------------------------------------------------------------------------
// Exponent inequalities

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Relative slack for floating comparisons of analytically ordered norms.
pub const NORM_SLACK: f64 = 1e-12;

/// `||f||_{p~} <= ||f||_p^theta ||f||_{p*}^(1-theta)` with
/// `1/p~ = theta/p + (1-theta)/p*` and `p < p~ < p*` (`p* = inf` allowed).
pub fn interpolation_check(f: &[f64], p: f64, p_star: f64, p_tilde: f64, mu: &[f64]) -> Result<Comparison> {
    if !(p > 0.0 && p < p_tilde && p_tilde < p_star) || f.len() != mu.len() {
        return Err(Error::BadExponents);
    }
    let inv_star = if p_star.is_infinite() { 0.0 } else { 1.0 / p_star };
    let theta = (1.0 / p_tilde - inv_star) / (1.0 / p - inv_star);
    let lhs = lp_norm(f, p_tilde, mu);
    let rhs = lp_norm(f, p, mu).powf(theta) * lp_norm(f, p_star, mu).powf(1.0 - theta);
    Ok(Comparison { lhs, rhs, holds: lhs <= rhs * (1.0 + NORM_SLACK) })
}

/// `||u||_{p~} <= mu(X)^(1/p~ - 1/p) ||u||_p` for `p~ < p`.
pub fn holder_lower_check(u: &[f64], p_tilde: f64, p: f64, mu: &[f64]) -> Result<Comparison> {
    if !(p_tilde > 0.0 && p_tilde < p) || u.len() != mu.len() {
        return Err(Error::BadExponents);
    }
    let total: f64 = mu.iter().sum();
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let lhs = lp_norm(u, p_tilde, mu);
    let rhs = total.powf(1.0 / p_tilde - inv_p) * lp_norm(u, p, mu);
    Ok(Comparison { lhs, rhs, holds: lhs <= rhs * (1.0 + NORM_SLACK) })
}
