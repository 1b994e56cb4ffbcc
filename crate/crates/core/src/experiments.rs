//! Named desk-scale experiments. Each produces a report with a table (for
//! CSV export) and a list of checked claims, every claim tagged with how
//! its bound was obtained.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compactness::{equi_integrability_modulus, interpolation_check, separated_bump_witness, tail_bump_witness, EquiVerdict};
use crate::error::{Error, Result};
use crate::generators::{discrete_n, dyadic_tail, generate, uniform_grid, Comb, GeneratorSpec, Provenance};
use crate::geometry::{covering_profile, doubling_at_infinity, doubling_constant, h_value, integrability_curve, Verdict};

pub const EXPERIMENT_NAMES: &[&str] = &[
    "exdis-doubling",
    "exp0-bound",
    "exint1-integrability",
    "comb-integrability",
    "trzecie-witness",
    "doubinf-witness",
    "interpolation",
];

/// Slack on closed-form upper bounds checked against discretizations.
pub const BOUND_SLACK: f64 = 1.05;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Claim {
    pub statement: String,
    pub value: f64,
    pub bound: f64,
    pub provenance: Provenance,
    pub reference: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub seed: u64,
    pub claims: Vec<Claim>,
    pub table: Table,
    pub passed: bool,
}

fn claim(statement: impl Into<String>, value: f64, bound: f64, pass: bool, provenance: Provenance, reference: &str) -> Claim {
    Claim { statement: statement.into(), value, bound, provenance, reference: reference.into(), pass }
}

fn report(name: &str, seed: u64, claims: Vec<Claim>, table: Table) -> ExperimentReport {
    let passed = claims.iter().all(|c| c.pass);
    ExperimentReport { name: name.into(), seed, claims, table, passed }
}

pub fn run_experiment(name: &str, seed: u64) -> Result<ExperimentReport> {
    match name {
        "exdis-doubling" => exdis_doubling(20),
        "exp0-bound" => exp0_bound(1e4),
        "exint1-integrability" => exint1_integrability(),
        "comb-integrability" => {
            let c = comb_integrability_experiment(4, 2, 32, 0.1)?;
            Ok(comb_report(&c))
        }
        "trzecie-witness" => trzecie_witness(),
        "doubinf-witness" => doubinf_witness(),
        "interpolation" => interpolation_experiment(seed, 1000),
        other => Err(Error::InvalidParams(format!("unknown experiment {other:?}; expected one of {}", EXPERIMENT_NAMES.join(", ")))),
    }
}

/// Discrete metric on `{1..n}` with `mu({j}) = 2^-j`.
pub fn exdis_doubling(n: usize) -> Result<ExperimentReport> {
    use Provenance::*;
    let s = discrete_n(n)?;
    let mut t = Table::new(&["c", "delta", "measured", "expected", "pass"]);
    let mut claims = Vec::new();
    for c in [2.0, 4.0] {
        for frac in [0.25, 0.5, 1.0] {
            let delta = frac / c;
            let m = doubling_constant(&s, c, delta)?;
            let pass = m == 1.0;
            t.rows.push(vec![c.to_string(), delta.to_string(), m.to_string(), "1".into(), pass.to_string()]);
            claims.push(claim(format!("Delta_{c}({delta}) = 1"), m, 1.0, pass, ClosedFormBound, "balls of radius <= 1 are singletons"));
        }
    }
    let h = h_value(&s, 0.5);
    let want = 0.5f64.powi(n as i32);
    claims.push(claim("h(0.5) = 2^-n", h, want, h == want, ClosedFormBound, "smallest atom of the discrete space"));
    let size = covering_profile(&s, &[0.5])?[0].net_size as f64;
    claims.push(claim("0.5-net has n points", size, n as f64, size == n as f64, Trivial, "all points are 1 apart"));
    Ok(report("exdis-doubling", 0, claims, t))
}

/// Measured `Delta_c(delta)` on the three half-line densities against their
/// closed-form upper bounds.
pub fn exp0_bound(resolution: f64) -> Result<ExperimentReport> {
    use Provenance::ClosedFormBound;
    type Bound = fn(f64, f64, f64) -> f64;
    let families: [(&str, &[f64], Bound, &str); 3] = [
        ("exp_density", &[0.25, 0.5, 1.0], |c, d, b| 2.0 * c * (c * d).powf(b).exp(), "Delta_c(delta) <= 2c exp((c delta)^beta)"),
        ("gauss_density", &[0.25, 0.5, 1.0], |c, d, b| 2.0 * c * ((c + 1.0) * d).powf(b).exp(), "Delta_c(delta) <= 2c exp(((c+1) delta)^beta)"),
        ("inv_exp_density", &[0.25, 0.5], |c, d, b| 4.0 * c * (2.0 / d).powf(b).exp(), "Delta_c(delta) <= 4c exp((2/delta)^beta)"),
    ];
    let jobs: Vec<(&str, f64, Bound, &str)> =
        families.iter().flat_map(|&(name, betas, f, r)| betas.iter().map(move |&b| (name, b, f, r))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(name, beta, bound, reference)| {
            let sp = generate(&GeneratorSpec::new(name, &[("beta", beta), ("T", 10.0), ("resolution", resolution)]))?.space;
            let mut out = Vec::new();
            for c in [2.0, 4.0] {
                for delta in [0.1, 0.5, 1.0] {
                    let m = doubling_constant(&sp, c, delta)?;
                    let b = bound(c, delta, beta);
                    out.push((name, c, delta, beta, m, b, reference));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["example", "c", "delta", "beta", "measured", "bound", "pass"]);
    let mut claims = Vec::new();
    for (name, c, delta, beta, m, b, reference) in rows.into_iter().flatten() {
        let pass = m <= b * BOUND_SLACK;
        t.rows.push(vec![name.into(), c.to_string(), delta.to_string(), beta.to_string(), m.to_string(), b.to_string(), pass.to_string()]);
        claims.push(claim(format!("{name} beta={beta} c={c} delta={delta}"), m, b * BOUND_SLACK, pass, ClosedFormBound, reference));
    }
    Ok(report("exp0-bound", 0, claims, t))
}

/// Integrability functional of `exp(-x^beta) dx` at `r = 1`: convergent
/// truncation curve for `beta = 2`, divergent for `beta = 1`.
pub fn exint1_integrability() -> Result<ExperimentReport> {
    use Provenance::*;
    let tol = 1e-3;
    let mut t = Table::new(&["beta", "T", "partial_sum"]);
    let mut claims = Vec::new();
    for (beta, top) in [(2.0, 16.0), (1.0, 40.0)] {
        let sp = generate(&GeneratorSpec::new("gauss_density", &[("beta", beta), ("T", top + 2.0), ("resolution", 1e3)]))?.space;
        let sched: Vec<f64> = (1..=(top as usize)).map(|k| k as f64).collect();
        let rep = integrability_curve(&sp, 1.0, &sched, tol)?;
        for (tt, v) in &rep.truncation_curve {
            t.rows.push(vec![beta.to_string(), tt.to_string(), v.to_string()]);
        }
        if beta > 1.0 {
            claims.push(claim(
                "beta = 2: increment over the last doubling < tol",
                rep.last_doubling_increment,
                tol,
                rep.verdict == Verdict::Integrable,
                ClosedFormBound,
                "density exp(-x^beta) with beta > 1 is integrable",
            ));
        } else {
            claims.push(claim(
                "beta = 1: increment over the last decade > 10 tol",
                rep.last_decade_increment,
                10.0 * tol,
                rep.verdict == Verdict::Divergent,
                Derived,
                "doubling measure on an unbounded space is not integrable",
            ));
        }
    }
    Ok(report("exint1-integrability", 0, claims, t))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CombReport {
    pub r: f64,
    pub depth: usize,
    pub branching: usize,
    pub resolution: usize,
    /// `int_{J_0} dmu / mu(B(x, r))`
    pub j0_term: f64,
    /// `e^{1/16} / r`
    pub j0_bound: f64,
    /// `(k, contribution of tooth J_k)`
    pub tooth_terms: Vec<(usize, f64)>,
    /// `(n, functional restricted to spine and teeth of depth <= n)`
    pub partial_sums: Vec<(usize, f64)>,
    pub increments: Vec<f64>,
    pub tolerance: f64,
    pub cauchy: bool,
}

/// Integrability functional on a truncated comb, computed with log-domain
/// ball masses so deep teeth (weights near `e^-900`) keep full precision.
///
/// The partial sums are Cauchy when the increments shrink monotonically
/// and the last one is below `tolerance` times the total.
pub fn comb_integrability_experiment(depth: usize, branching: usize, resolution: usize, r: f64) -> Result<CombReport> {
    if !(r > 0.0 && r < 0.25) {
        return Err(Error::InvalidParams("need 0 < r < 1/4".into()));
    }
    let comb = Comb::new(depth, branching, resolution)?;
    let lm = comb.log_masses();
    let n = lm.len();
    let terms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let inside: Vec<f64> = (0..n).filter(|&y| y == x || comb.dist(x, y) < r).map(|y| lm[y]).collect();
            let top = inside.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let log_ball = top + inside.iter().map(|v| (v - top).exp()).sum::<f64>().ln();
            (lm[x] - log_ball).exp()
        })
        .collect();
    let mut tooth = vec![0.0; comb.segments.len()];
    for (p, t) in comb.points.iter().zip(&terms) {
        tooth[p.segment] += t;
    }
    let j0_term = tooth[0];
    let tooth_terms: Vec<(usize, f64)> = comb.segments.iter().zip(&tooth).map(|(s, &v)| (s.k, v)).collect();
    let partial_sums: Vec<(usize, f64)> = (0..=depth)
        .map(|d| (d, comb.segments.iter().zip(&tooth).filter(|(s, _)| s.word.len() <= d).map(|(_, v)| v).sum()))
        .collect();
    let increments: Vec<f64> = partial_sums.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let tolerance = 1e-3;
    let total = partial_sums.last().unwrap().1;
    let cauchy = increments.windows(2).all(|w| w[1] <= w[0]) && increments.last().map_or(true, |&d| d <= tolerance * total);
    Ok(CombReport {
        r,
        depth,
        branching,
        resolution,
        j0_term,
        j0_bound: (1.0f64 / 16.0).exp() / r,
        tooth_terms,
        partial_sums,
        increments,
        tolerance,
        cauchy,
    })
}

fn comb_report(c: &CombReport) -> ExperimentReport {
    use Provenance::*;
    let mut t = Table::new(&["depth", "partial_sum"]);
    for (d, v) in &c.partial_sums {
        t.rows.push(vec![d.to_string(), v.to_string()]);
    }
    let last = c.increments.last().copied().unwrap_or(0.0);
    let total = c.partial_sums.last().map_or(0.0, |p| p.1);
    let claims = vec![
        claim(
            "J_0 term <= e^{1/16}/r",
            c.j0_term,
            c.j0_bound * BOUND_SLACK,
            c.j0_term <= c.j0_bound * BOUND_SLACK,
            ClosedFormBound,
            "int_{J_0} 1/mu(B(x,r)) dmu <= e^{1/16}/r for 0 < r < 1/4",
        ),
        claim("partial sums over tooth depth are Cauchy", last, c.tolerance * total, c.cauchy, Derived, "truncation schedule over tooth depth"),
    ];
    report("comb-integrability", 0, claims, t)
}

/// Separated normalized bumps on the discrete space and on a grid.
pub fn trzecie_witness() -> Result<ExperimentReport> {
    use Provenance::*;
    let s = discrete_n(10)?;
    let w = separated_bump_witness(&s, 0.4, 1.0, 2.0)?;
    let m = equi_integrability_modulus(&w.sequence.functions, s.mu(), 2.0, &[1.0 / 1024.0], 0.5)?;
    let mut t = Table::new(&["space", "delta", "members", "pairwise_gap", "norm_bound"]);
    t.rows.push(vec![
        "discrete_N(10)".into(),
        "0.4".into(),
        w.centers.len().to_string(),
        w.sequence.pairwise_lp_gap.to_string(),
        w.sequence.norm_bound.to_string(),
    ]);
    let grid = uniform_grid(64, 1.0)?;
    let mut sizes = Vec::new();
    for delta in [0.1, 0.05, 0.025] {
        let g = separated_bump_witness(&grid, delta, 0.5, 2.0)?;
        t.rows.push(vec![
            "grid(64)".into(),
            delta.to_string(),
            g.centers.len().to_string(),
            g.sequence.pairwise_lp_gap.to_string(),
            g.sequence.norm_bound.to_string(),
        ]);
        sizes.push(g.centers.len());
    }
    let claims = vec![
        claim("pairwise ||f_k - f_l||_p^p = 2", w.sequence.pairwise_lp_gap, 2.0, (w.sequence.pairwise_lp_gap - 2.0).abs() <= 1e-12, ClosedFormBound, "disjointly supported unit bumps"),
        claim("one member per point", w.centers.len() as f64, 10.0, w.centers.len() == 10, Trivial, "discrete metric separates all points"),
        claim("balls B(x_k, delta) miss B(x_l, C_d delta)", f64::from(u8::from(w.disjoint_balls)), 1.0, w.disjoint_balls, Derived, "separation C~_d C_d^2 delta"),
        claim("family is not equi-integrable", m.greedy[0], 0.5, m.verdict == EquiVerdict::NotEquiIntegrable, Derived, "greedy picks the spike atom"),
        claim("grid witnesses grow as delta shrinks", sizes[2] as f64, sizes[0] as f64, sizes.windows(2).all(|w| w[1] > w[0]), Derived, "packing number of the grid"),
    ];
    Ok(report("trzecie-witness", 0, claims, t))
}

/// Tail bumps on the dyadic-tail space, contrasted with `exp(-x^2)`.
pub fn doubinf_witness() -> Result<ExperimentReport> {
    use Provenance::*;
    let s = dyadic_tail(8)?;
    let radii = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    let w = tail_bump_witness(&s, 0, &radii, 0.5, 2.0)?;
    let inf = doubling_at_infinity(&s, 0, &radii)?;
    // every member puts unit mass on a set of measure at most this
    let last_tail = s.tail_mass(0, s.c_d() * radii[radii.len() - 1]) * (1.0 + 1e-9);
    let m = equi_integrability_modulus(&w.sequence.functions, s.mu(), 2.0, &[last_tail], 0.5)?;
    let mut t = Table::new(&["R", "tail_mass", "ratio", "member_norm"]);
    for i in 0..radii.len() {
        t.rows.push(vec![radii[i].to_string(), w.tail_masses[i].to_string(), w.ratios[i].to_string(), w.sequence.member_norms[i].to_string()]);
    }
    let worst_tail = w.tail_masses.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
    let worst_ratio = w.ratios.iter().copied().fold(0.0, f64::max);
    let gauss = generate(&GeneratorSpec::new("gauss_density", &[("beta", 2.0), ("T", 6.0), ("resolution", 200.0)]))?.space;
    let g_inf = doubling_at_infinity(&gauss, 0, &[0.5, 1.0, 1.5, 2.0, 2.5])?;
    let claims = vec![
        claim("tail L^p mass of every member is 1", worst_tail, 1e-12, worst_tail <= 1e-12, Trivial, "normalization by the tail mass"),
        claim("ratio mu(X \\ B(0,R)) / mu(X \\ B(0,2R)) <= 4", worst_ratio, 4.0, worst_ratio <= 4.0 * (1.0 + 1e-12), ClosedFormBound, "dyadic-tail density, blocks of mass 2^-k"),
        claim("doubling at infinity estimate <= 4", inf.estimate, 4.0, inf.estimate <= 4.0 * (1.0 + 1e-12), ClosedFormBound, "dyadic-tail density"),
        claim("member norms bounded", w.sequence.norm_bound, f64::INFINITY, w.sequence.norm_bound.is_finite(), Derived, "pointwise supremum gradient"),
        claim("family is not equi-integrable", m.greedy[0], 0.5, m.verdict != EquiVerdict::EquiIntegrable, Derived, "unit tail masses"),
        claim("exp(-x^2) ratios diverge", *g_inf.ratios.last().unwrap(), 10.0 * g_inf.ratios[g_inf.ratios.len() / 2], g_inf.divergent, Derived, "computed ratios"),
    ];
    Ok(report("doubinf-witness", 0, claims, t))
}

/// Random interpolation inequalities plus the atom identity.
pub fn interpolation_experiment(seed: u64, cases: usize) -> Result<ExperimentReport> {
    use Provenance::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new(&["case", "p", "p_tilde", "p_star", "lhs", "rhs", "pass"]);
    let mut failures = 0usize;
    for case in 0..cases {
        let n = rng.random_range(1..=12);
        let mu: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.01).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let p = 0.5 + 3.0 * rng.random::<f64>();
        let p_tilde = p + 0.1 + 3.0 * rng.random::<f64>();
        let p_star = if rng.random_bool(0.2) { f64::INFINITY } else { p_tilde + 0.1 + 3.0 * rng.random::<f64>() };
        let c = interpolation_check(&f, p, p_star, p_tilde, &mu)?;
        failures += usize::from(!c.holds);
        t.rows.push(vec![case.to_string(), p.to_string(), p_tilde.to_string(), p_star.to_string(), c.lhs.to_string(), c.rhs.to_string(), c.holds.to_string()]);
    }
    let mu = [0.3, 0.2, 0.5];
    let atom = interpolation_check(&[0.0, 1.0, 0.0], 1.5, 6.0, 3.0, &mu)?;
    let gap = (atom.lhs - atom.rhs).abs();
    let claims = vec![
        claim("random cases violating the inequality", failures as f64, 0.0, failures == 0, Derived, "exact sums"),
        claim("atom indicator gives equality", gap, 1e-12, gap <= 1e-12, Trivial, "exponent identity mu^(1/p~) = mu^(theta/p) mu^((1-theta)/p*)"),
    ];
    Ok(report("interpolation", seed, claims, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_rejected() {
        assert!(run_experiment("nope", 0).is_err());
    }

    #[test]
    fn comb_rejects_large_r() {
        assert!(comb_integrability_experiment(1, 2, 4, 0.25).is_err());
    }

    #[test]
    fn discrete_doubling_exact() {
        assert!(exdis_doubling(20).unwrap().passed);
    }
}
