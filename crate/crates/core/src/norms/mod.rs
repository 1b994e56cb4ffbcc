//! Hajłasz-type seminorms as minimal-gradient programs.
//!
//! A pair `(x, y)` lives on the dyadic level `k` with
//! `2^(-k-1) <= d(x, y) < 2^(-k)` and imposes
//! `g_k(x) + g_k(y) >= |u(x) - u(y)| / d(x, y)^alpha`. The Sobolev kind
//! collapses all levels into a single `g`. Objectives:
//!
//! * `M_sobolev`: `||g||_{L^p}`
//! * `M_TL`: `||(sum_k g_k^q)^(1/q)||_{L^p}`
//! * `N_besov`: `(sum_k ||g_k||_{L^p}^q)^(1/q)`; levels decouple
//!
//! For `p, q >= 1` the programs are convex and solved with a certified
//! interior-point method. Exponents below 1 get a feasible upper bound from
//! multi-start coordinate descent and are labelled accordingly.

pub mod barrier;
pub mod bump;
pub mod downgrade;
pub mod embs;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::FiniteQMMSpace;
use barrier::{Group, Program, Row, Settings};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    #[serde(rename = "M")]
    MSobolev,
    #[serde(rename = "TL")]
    MTriebelLizorkin,
    #[serde(rename = "N")]
    NBesov,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Certified,
    UpperBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormProblem {
    pub alpha: f64,
    pub p: f64,
    /// `f64::INFINITY` for `q = inf`; ignored by the Sobolev kind.
    pub q: f64,
    pub kind: NormKind,
}

/// Level-indexed gradient. The Sobolev kind stores one row and no levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientSequence {
    pub levels: Vec<i32>,
    pub g: Vec<Vec<f64>>,
}

impl GradientSequence {
    pub fn collapsed(g: Vec<f64>) -> Self {
        Self { levels: Vec::new(), g: vec![g] }
    }

    pub fn is_collapsed(&self) -> bool {
        self.levels.is_empty()
    }

    /// Row for level `k`, or the single row of a collapsed gradient.
    pub fn at(&self, k: i32) -> Option<&[f64]> {
        if self.is_collapsed() {
            return self.g.first().map(|v| v.as_slice());
        }
        self.levels.iter().position(|&l| l == k).map(|i| self.g[i].as_slice())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverInfo {
    pub status: Status,
    pub newton_steps: usize,
    /// Largest pair-constraint violation of the returned gradient.
    pub residual: f64,
    /// Seminorm lower bound from weak duality (0 for upper bounds).
    pub lower_bound: f64,
    /// `seminorm - lower_bound`.
    pub certified_gap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormResult {
    pub problem: NormProblem,
    pub seminorm: f64,
    pub lp_norm: f64,
    pub full_norm: f64,
    pub optimal_g: GradientSequence,
    pub solver: SolverInfo,
}

/// Certification threshold on the seminorm scale.
pub const GAP_TOLERANCE: f64 = 1e-6;

/// `(sum mu_i |u_i|^p)^(1/p)`, or `max |u_i|` for `p = inf`.
pub fn lp_norm(u: &[f64], p: f64, mu: &[f64]) -> f64 {
    if p.is_infinite() {
        return u.iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    u.iter().zip(mu).map(|(v, m)| m * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `(sum_k a_k^q)^(1/q)` with `q = inf` giving the maximum.
pub fn lq_combine(a: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return a.iter().copied().fold(0.0, f64::max);
    }
    a.iter().map(|x| x.powf(q)).sum::<f64>().powf(1.0 / q)
}

/// The `k` with `2^(-k-1) <= d < 2^(-k)`.
pub fn dyadic_level(d: f64) -> i32 {
    let mut k = (-d.log2()).floor() as i32;
    while d >= 2f64.powi(-k) {
        k -= 1;
    }
    while d < 2f64.powi(-k - 1) {
        k += 1;
    }
    k
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelConstraints {
    /// `None` for the collapsed Sobolev constraint set.
    pub level: Option<i32>,
    /// `(i, j, c_ij)` with `i < j` and `c_ij > 0`.
    pub pairs: Vec<(usize, usize, f64)>,
}

fn check_problem(space: &FiniteQMMSpace, u: &[f64], alpha: f64, p: f64) -> Result<()> {
    if u.len() != space.len() || u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Malformed("function does not match the space".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) || !(p > 0.0) {
        return Err(Error::InvalidParams("need alpha > 0 and p > 0".into()));
    }
    Ok(())
}

/// Pair constraints per dyadic level, sorted by level. Each ordered pair
/// contributes at the level of its own distance; both orders coincide on
/// symmetric spaces.
pub fn build_level_constraints(space: &FiniteQMMSpace, u: &[f64], alpha: f64) -> Vec<LevelConstraints> {
    let n = space.len();
    let mut all: Vec<(i32, usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let du = (u[i] - u[j]).abs();
            if du == 0.0 {
                continue;
            }
            let (dij, dji) = (space.dist(i, j), space.dist(j, i));
            let (ki, kj) = (dyadic_level(dij), dyadic_level(dji));
            if ki == kj {
                all.push((ki, i, j, du / dij.min(dji).powf(alpha)));
            } else {
                all.push((ki, i, j, du / dij.powf(alpha)));
                all.push((kj, i, j, du / dji.powf(alpha)));
            }
        }
    }
    all.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out: Vec<LevelConstraints> = Vec::new();
    for (k, i, j, c) in all {
        match out.last_mut() {
            Some(lc) if lc.level == Some(k) => lc.pairs.push((i, j, c)),
            _ => out.push(LevelConstraints { level: Some(k), pairs: vec![(i, j, c)] }),
        }
    }
    out
}

/// Collapsed constraints `g_i + g_j >= |u_i - u_j| / min(d(i,j), d(j,i))^alpha`.
pub fn build_sobolev_constraints(space: &FiniteQMMSpace, u: &[f64], alpha: f64) -> LevelConstraints {
    let n = space.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let du = (u[i] - u[j]).abs();
            if du > 0.0 {
                pairs.push((i, j, du / space.dist(i, j).min(space.dist(j, i)).powf(alpha)));
            }
        }
    }
    LevelConstraints { level: None, pairs }
}

pub fn build_constraints(space: &FiniteQMMSpace, u: &[f64], problem: &NormProblem) -> Vec<LevelConstraints> {
    match problem.kind {
        NormKind::MSobolev => vec![build_sobolev_constraints(space, u, problem.alpha)],
        _ => build_level_constraints(space, u, problem.alpha),
    }
}

/// Largest violation of the pair constraints by `grad` and the ordered
/// pair attaining it; `(0, None)` when feasible.
pub fn worst_violation(space: &FiniteQMMSpace, u: &[f64], alpha: f64, grad: &GradientSequence) -> (f64, Option<(usize, usize)>) {
    let n = space.len();
    let mut worst = (0.0, None);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = space.dist(i, j);
            let c = (u[i] - u[j]).abs() / d.powf(alpha);
            let have = match grad.at(dyadic_level(d)) {
                Some(g) => g[i] + g[j],
                None => 0.0,
            };
            if c - have > worst.0 {
                worst = (c - have, Some((i, j)));
            }
        }
    }
    worst
}

/// Largest violation of the pair constraints by `grad` (0 when feasible).
pub fn max_violation(space: &FiniteQMMSpace, u: &[f64], alpha: f64, grad: &GradientSequence) -> f64 {
    worst_violation(space, u, alpha, grad).0
}

/// Feasibility slack used when checking gradients built from solver output.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Every dyadic level carrying at least one ordered pair, ascending.
pub fn space_levels(space: &FiniteQMMSpace) -> Vec<i32> {
    let n = space.len();
    let mut levels: Vec<i32> =
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| dyadic_level(space.dist(i, j))).collect();
    levels.sort_unstable();
    levels.dedup();
    levels
}

/// Outcome of one Sobolev-type subproblem on `n` points.
struct PairSolve {
    g: Vec<f64>,
    /// `||g||_{L^p}` and its certified lower bound
    value: f64,
    lower: f64,
    steps: usize,
    status: Status,
}

/// Compact variable numbering for the points that appear in some pair.
fn compact(n: usize, pairs: &[(usize, usize, f64)]) -> (Vec<usize>, Vec<Option<usize>>) {
    let mut idx = vec![None; n];
    let mut vars = Vec::new();
    for &(i, j, _) in pairs {
        for v in [i, j] {
            if idx[v].is_none() {
                idx[v] = Some(vars.len());
                vars.push(v);
            }
        }
    }
    (vars, idx)
}

fn solve_pairs(mu: &[f64], pairs: &[(usize, usize, f64)], p: f64, seed: u64) -> PairSolve {
    let n = mu.len();
    if pairs.is_empty() {
        return PairSolve { g: vec![0.0; n], value: 0.0, lower: 0.0, steps: 0, status: Status::Certified };
    }
    if p.is_infinite() {
        // the heaviest pair forces max g >= c/2, and g = c_max/2 on every
        // constrained point attains it
        let half = pairs.iter().map(|t| t.2).fold(0.0, f64::max) / 2.0;
        let mut g = vec![0.0; n];
        for &(i, j, _) in pairs {
            g[i] = half;
            g[j] = half;
        }
        return PairSolve { g, value: half, lower: half, steps: 0, status: Status::Certified };
    }
    let (vars, idx) = compact(n, pairs);
    let prog = Program {
        nvars: vars.len(),
        rows: pairs.iter().map(|&(i, j, c)| Row { a: idx[i].unwrap(), b: idx[j].unwrap(), c }).collect(),
        groups: vars.iter().map(|&v| Group { weight: mu[v], vars: vec![idx[v].unwrap()] }).collect(),
        p,
        q: p,
    };
    let (x, objective, lower, steps, status) = run_program(&prog, seed);
    let mut g = vec![0.0; n];
    for (k, &v) in vars.iter().enumerate() {
        g[v] = x[k];
    }
    let (value, lower) = seminorm_from(objective, lower, p);
    PairSolve { g, value, lower, steps, status }
}

/// Certified solve for convex exponents, multi-start upper bound otherwise.
fn run_program(prog: &Program, seed: u64) -> (Vec<f64>, f64, f64, usize, Status) {
    if prog.p >= 1.0 && prog.q >= 1.0 {
        let s = barrier::solve(prog, Settings::default());
        (s.x, s.objective, s.lower_bound.max(0.0), s.newton_steps, Status::Certified)
    } else {
        let (x, v) = upper_bound_search(prog, seed);
        (x, v, 0.0, 0, Status::UpperBound)
    }
}

/// Lowers each coordinate to the least value its rows allow, repeatedly.
/// The objective is nondecreasing in every coordinate, so this never hurts.
fn tighten(adj: &[Vec<(usize, f64)>], x: &mut [f64], order: &[usize]) {
    for _ in 0..1000 {
        let mut changed = false;
        for &v in order {
            let need = adj[v].iter().map(|&(w, c)| c - x[w]).fold(0.0, f64::max);
            if need < x[v] {
                x[v] = need;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Feasible points from a convex surrogate, the half-bound point and random
/// orientations of the rows, each tightened by coordinate descent.
fn upper_bound_search(prog: &Program, seed: u64) -> (Vec<f64>, f64) {
    let n = prog.nvars;
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for r in &prog.rows {
        adj[r.a].push((r.b, r.c));
        adj[r.b].push((r.a, r.c));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let surrogate = Program { p: prog.p.max(1.0), q: prog.q.max(1.0), ..prog.clone() };
    starts.push(barrier::solve(&surrogate, Settings { rel_gap: 1e-8, ..Settings::default() }).x);
    let mut half = vec![0.0; n];
    for r in &prog.rows {
        half[r.a] = f64::max(half[r.a], r.c / 2.0);
        half[r.b] = f64::max(half[r.b], r.c / 2.0);
    }
    starts.push(half);
    for _ in 0..32 {
        let mut x = vec![0.0; n];
        for r in &prog.rows {
            let v = if rng.random::<bool>() { r.a } else { r.b };
            x[v] = f64::max(x[v], r.c);
        }
        starts.push(x);
    }
    let mut best = (Vec::new(), f64::INFINITY);
    for mut x in starts {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        tighten(&adj, &mut x, &order);
        let v = prog.objective(&x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

fn seminorm_from(objective: f64, lower: f64, p: f64) -> (f64, f64) {
    (objective.max(0.0).powf(1.0 / p), lower.max(0.0).powf(1.0 / p))
}

fn finish(
    space: &FiniteQMMSpace,
    u: &[f64],
    problem: NormProblem,
    seminorm: f64,
    lower: f64,
    steps: usize,
    status: Status,
    grad: GradientSequence,
) -> Result<NormResult> {
    let residual = max_violation(space, u, problem.alpha, &grad).max(0.0);
    let gap = if status == Status::Certified { (seminorm - lower).max(0.0) } else { f64::NAN };
    if status == Status::Certified && gap > GAP_TOLERANCE * (1.0 + seminorm) {
        return Err(Error::SolverDiverged { gap, iterations: steps });
    }
    let lp = lp_norm(u, problem.p, space.mu());
    Ok(NormResult {
        problem,
        seminorm,
        lp_norm: lp,
        full_norm: seminorm + lp,
        optimal_g: grad,
        solver: SolverInfo {
            status,
            newton_steps: steps,
            residual,
            lower_bound: if status == Status::Certified { lower } else { 0.0 },
            certified_gap: if status == Status::Certified { gap } else { f64::NAN },
        },
    })
}

/// `inf ||g||_{L^p}` over Hajłasz `alpha`-gradients of `u`.
pub fn min_gradient_sobolev(space: &FiniteQMMSpace, u: &[f64], alpha: f64, p: f64) -> Result<NormResult> {
    check_problem(space, u, alpha, p)?;
    let lc = build_sobolev_constraints(space, u, alpha);
    let s = solve_pairs(space.mu(), &lc.pairs, p, 0);
    let problem = NormProblem { alpha, p, q: f64::INFINITY, kind: NormKind::MSobolev };
    finish(space, u, problem, s.value, s.lower, s.steps, s.status, GradientSequence::collapsed(s.g))
}

/// Triebel–Lizorkin seminorm `inf ||(sum_k g_k^q)^(1/q)||_{L^p}`.
pub fn min_gradient_tl(space: &FiniteQMMSpace, u: &[f64], alpha: f64, p: f64, q: f64) -> Result<NormResult> {
    check_problem(space, u, alpha, p)?;
    if !(q > 0.0) {
        return Err(Error::InvalidParams("q must be positive".into()));
    }
    if p.is_infinite() && q.is_finite() {
        return Err(Error::InvalidParams("the TL kind with p = inf needs q = inf".into()));
    }
    let problem = NormProblem { alpha, p, q, kind: NormKind::MTriebelLizorkin };
    let levels = build_level_constraints(space, u, alpha);
    let level_ids: Vec<i32> = levels.iter().map(|l| l.level.unwrap()).collect();
    let n = space.len();
    if q.is_infinite() {
        // sup over levels of a level-wise gradient is a Hajłasz gradient and
        // conversely, so the two seminorms coincide
        let mut r = min_gradient_sobolev(space, u, alpha, p)?;
        let g = r.optimal_g.g[0].clone();
        r.optimal_g = GradientSequence { levels: level_ids.clone(), g: vec![g; level_ids.len()] };
        r.problem = problem;
        if level_ids.is_empty() {
            r.optimal_g = GradientSequence { levels: vec![], g: vec![vec![0.0; n]] };
        }
        return Ok(r);
    }
    // variables: (level, point) pairs that occur in some row
    let mut var_of = vec![vec![None; n]; levels.len()];
    let mut owners: Vec<(usize, usize)> = Vec::new();
    let mut rows = Vec::new();
    for (li, lc) in levels.iter().enumerate() {
        for &(i, j, c) in &lc.pairs {
            for v in [i, j] {
                if var_of[li][v].is_none() {
                    var_of[li][v] = Some(owners.len());
                    owners.push((li, v));
                }
            }
            rows.push(Row { a: var_of[li][i].unwrap(), b: var_of[li][j].unwrap(), c });
        }
    }
    let mut grad = GradientSequence { levels: level_ids, g: vec![vec![0.0; n]; levels.len()] };
    if rows.is_empty() {
        if grad.levels.is_empty() {
            grad.g = vec![vec![0.0; n]];
        }
        return finish(space, u, problem, 0.0, 0.0, 0, Status::Certified, grad);
    }
    let mut groups: Vec<Group> = Vec::new();
    for x in 0..n {
        let vars: Vec<usize> = (0..levels.len()).filter_map(|li| var_of[li][x]).collect();
        if !vars.is_empty() {
            groups.push(Group { weight: space.mu()[x], vars });
        }
    }
    let prog = Program { nvars: owners.len(), rows, groups, p, q };
    let (x, objective, lower, steps, status) = run_program(&prog, 0);
    for (k, &(li, v)) in owners.iter().enumerate() {
        grad.g[li][v] = x[k];
    }
    let (semi, lower) = seminorm_from(objective, lower, p);
    finish(space, u, problem, semi, lower, steps, status, grad)
}

/// Besov seminorm `inf (sum_k ||g_k||_{L^p}^q)^(1/q)`: one independent
/// Sobolev-type program per level, combined in `l^q`.
pub fn min_gradient_besov(space: &FiniteQMMSpace, u: &[f64], alpha: f64, p: f64, q: f64) -> Result<NormResult> {
    check_problem(space, u, alpha, p)?;
    if !(q > 0.0) {
        return Err(Error::InvalidParams("q must be positive".into()));
    }
    let problem = NormProblem { alpha, p, q, kind: NormKind::NBesov };
    let levels = build_level_constraints(space, u, alpha);
    let solves: Vec<PairSolve> =
        levels.par_iter().enumerate().map(|(i, lc)| solve_pairs(space.mu(), &lc.pairs, p, i as u64)).collect();
    let uppers: Vec<f64> = solves.iter().map(|s| s.value).collect();
    let lowers: Vec<f64> = solves.iter().map(|s| s.lower).collect();
    let status = if solves.iter().all(|s| s.status == Status::Certified) { Status::Certified } else { Status::UpperBound };
    let steps = solves.iter().map(|s| s.steps).sum();
    let n = space.len();
    let grad = if levels.is_empty() {
        GradientSequence { levels: vec![], g: vec![vec![0.0; n]] }
    } else {
        GradientSequence { levels: levels.iter().map(|l| l.level.unwrap()).collect(), g: solves.into_iter().map(|s| s.g).collect() }
    };
    finish(space, u, problem, lq_combine(&uppers, q), lq_combine(&lowers, q), steps, status, grad)
}

/// Dispatch on the problem kind.
pub fn solve_norm(space: &FiniteQMMSpace, u: &[f64], problem: &NormProblem) -> Result<NormResult> {
    match problem.kind {
        NormKind::MSobolev => min_gradient_sobolev(space, u, problem.alpha, problem.p),
        NormKind::MTriebelLizorkin => min_gradient_tl(space, u, problem.alpha, problem.p, problem.q),
        NormKind::NBesov => min_gradient_besov(space, u, problem.alpha, problem.p, problem.q),
    }
}

/// `||g||` in the norm of the given kind, for any level-wise gradient.
pub fn gradient_norm(grad: &GradientSequence, mu: &[f64], p: f64, q: f64, kind: NormKind) -> f64 {
    match kind {
        NormKind::MSobolev => lp_norm(&grad.g[0], p, mu),
        NormKind::NBesov => {
            let per: Vec<f64> = grad.g.iter().map(|g| lp_norm(g, p, mu)).collect();
            lq_combine(&per, q)
        }
        NormKind::MTriebelLizorkin => {
            let n = mu.len();
            let pointwise: Vec<f64> = (0..n)
                .map(|x| {
                    let col: Vec<f64> = grad.g.iter().map(|g| g[x]).collect();
                    lq_combine(&col, q)
                })
                .collect();
            lp_norm(&pointwise, p, mu)
        }
    }
}

/// `max_y |u(x) - u(y)| / min(d(x, y), d(y, x))^alpha`, set to 0 on `zero_set`.
/// Feasible whenever `u` is constant on `zero_set`.
pub fn pointwise_sup_gradient(space: &FiniteQMMSpace, u: &[f64], alpha: f64, zero_set: &[usize]) -> Vec<f64> {
    let n = space.len();
    let mut skip = vec![false; n];
    for &z in zero_set {
        skip[z] = true;
    }
    (0..n)
        .map(|x| {
            if skip[x] {
                return 0.0;
            }
            (0..n)
                .filter(|&y| y != x)
                .map(|y| (u[x] - u[y]).abs() / space.dist(x, y).min(space.dist(y, x)).powf(alpha))
                .fold(0.0, f64::max)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> FiniteQMMSpace {
        FiniteQMMSpace::from_dense(None, vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn levels() {
        assert_eq!(dyadic_level(1.0), -1);
        assert_eq!(dyadic_level(0.5), 0);
        assert_eq!(dyadic_level(0.4), 1);
        assert_eq!(dyadic_level(0.99), 0);
        assert_eq!(dyadic_level(2.0), -2);
        for d in [0.3, 0.77, 1.9, 5.0] {
            assert_eq!(dyadic_level(d / 2.0), dyadic_level(d) + 1);
        }
    }

    #[test]
    fn two_point_constraint() {
        let lc = build_level_constraints(&two_points(), &[0.0, 1.0], 1.0);
        assert_eq!(lc, vec![LevelConstraints { level: Some(-1), pairs: vec![(0, 1, 1.0)] }]);
        assert!(build_level_constraints(&two_points(), &[2.0, 2.0], 1.0).is_empty());
    }

    #[test]
    fn two_point_sobolev() {
        let r = min_gradient_sobolev(&two_points(), &[0.0, 1.0], 1.0, 2.0).unwrap();
        assert!((r.seminorm - 0.5).abs() < 1e-9);
        assert!((r.optimal_g.g[0][0] - 0.5).abs() < 1e-5);
        assert_eq!(r.solver.status, Status::Certified);
        assert!(r.solver.residual <= 1e-9);
    }

    #[test]
    fn constant_function_is_free() {
        for kind in [NormKind::MSobolev, NormKind::MTriebelLizorkin, NormKind::NBesov] {
            let r = solve_norm(&two_points(), &[3.0, 3.0], &NormProblem { alpha: 1.0, p: 2.0, q: 2.0, kind }).unwrap();
            assert_eq!(r.seminorm, 0.0);
        }
    }

    #[test]
    fn lp_norm_basics() {
        assert!((lp_norm(&[2.0, 2.0], 3.0, &[0.5, 0.5]) - 2.0).abs() < 1e-15);
        assert_eq!(lp_norm(&[0.0, 1.0], 2.0, &[0.3, 0.25]), 0.5);
        assert_eq!(lp_norm(&[-4.0, 1.0], f64::INFINITY, &[0.3, 0.25]), 4.0);
    }

    #[test]
    fn infinite_p_closed_form() {
        let s = FiniteQMMSpace::from_line(None, vec![0.0, 0.3, 1.0], 1.0, vec![0.2, 0.3, 0.5]).unwrap();
        let u = [0.0, 0.6, 0.1];
        let m = min_gradient_sobolev(&s, &u, 1.0, f64::INFINITY).unwrap();
        assert!((m.seminorm - 1.0).abs() < 1e-15);
        let tl = min_gradient_tl(&s, &u, 1.0, f64::INFINITY, f64::INFINITY).unwrap();
        assert_eq!(tl.seminorm, m.seminorm);
        assert!(min_gradient_tl(&s, &u, 1.0, f64::INFINITY, 2.0).is_err());
        // levels 1 (c = 2), 0 (c = 5/7) and -1 (c = 0.1)
        let b = min_gradient_besov(&s, &u, 1.0, f64::INFINITY, 1.0).unwrap();
        assert!((b.seminorm - (1.0 + 5.0 / 14.0 + 0.05)).abs() < 1e-12);
    }

    #[test]
    fn nonconvex_is_labelled() {
        let r = min_gradient_sobolev(&two_points(), &[0.0, 1.0], 1.0, 0.5).unwrap();
        assert_eq!(r.solver.status, Status::UpperBound);
        // vertex solution g = (1, 0) is optimal for p < 1: (0.5 * 1)^2
        assert!((r.seminorm - 0.25).abs() < 1e-12);
    }
}
