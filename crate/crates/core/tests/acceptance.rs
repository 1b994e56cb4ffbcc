//! Acceptance criteria. Every criterion prints one PASS/FAIL line; the test
//! fails if any criterion does.

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::oracle::sobolev_oracle;
use common::{random_dense, random_u, rng};
use qmms_core::compactness::{
    frechet_certify, holder_lower_check, interpolation_check, key_inequality_check, separated_bump_witness, tail_bump_witness,
    FrechetOptions, FrechetOutcome,
};
use qmms_core::experiments::{comb_integrability_experiment, exp0_bound};
use qmms_core::generators::{discrete_n, dyadic_tail, generate, random_euclidean, uniform_grid, GeneratorSpec};
use qmms_core::geometry::{covering_profile, doubling_constant, h_value, integrability_curve, Verdict};
use qmms_core::norms::embs::embs_check;
use qmms_core::norms::{min_gradient_sobolev, pointwise_sup_gradient, Status};
use qmms_core::regularize::chain_metric;
use qmms_core::space::snowflake;
use qmms_core::FiniteQMMSpace;
use rand::Rng;

const DOUBLING_SLACK: f64 = 1.05;
const DOUBLING_BUDGET: Duration = Duration::from_secs(30);
const INTEGRABILITY_TOL: f64 = 1e-3;
const INTEGRABILITY_BUDGET: Duration = Duration::from_secs(10);
const COMB_SLACK: f64 = 1.05;
const IDENTITY_CASES: usize = 200;
const IDENTITY_BUDGET: Duration = Duration::from_secs(120);
const ORACLE_CASES: usize = 100;
const ORACLE_TOL: f64 = 1e-4;
const KEY_CASES: usize = 1000;
const WITNESS_TOL: f64 = 1e-12;
const FRECHET_FAMILIES: usize = 50;
const SNOWFLAKE_TOL: f64 = 1e-9;
const COLLINEAR_TOL: f64 = 1e-12;
const INTERPOLATION_CASES: usize = 1000;
const ATOM_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn c1_doubling_bounds() -> Outcome {
    let t = Instant::now();
    let rep = exp0_bound(1e4).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for row in &rep.table.rows {
        let num = |i: usize| row[i].parse::<f64>().unwrap();
        let (c, delta, beta, measured) = (num(1), num(2), num(3), num(4));
        let bound = match row[0].as_str() {
            "exp_density" => 2.0 * c * (c * delta).powf(beta).exp(),
            "gauss_density" => 2.0 * c * ((c + 1.0) * delta).powf(beta).exp(),
            "inv_exp_density" => 4.0 * c * (2.0 / delta).powf(beta).exp(),
            other => return Err(format!("unexpected example {other}")),
        };
        worst = worst.max(measured / bound);
        check(measured <= bound * DOUBLING_SLACK, format!("{row:?} exceeds {bound}"))?;
    }
    let el = t.elapsed();
    check(el < DOUBLING_BUDGET, format!("runtime {el:?}"))?;
    Ok(format!("{} configurations, worst measured/bound {worst:.3}, {el:.1?}", rep.table.rows.len()))
}

fn c2_discrete_exactness() -> Outcome {
    let s = discrete_n(20).map_err(|e| e.to_string())?;
    for c in [1.5, 2.0, 3.0, 4.0] {
        for delta in [0.05, 0.1, 0.2, 1.0 / c] {
            if delta <= 1.0 / c {
                let m = doubling_constant(&s, c, delta).unwrap();
                check(m == 1.0, format!("Delta_{c}({delta}) = {m}"))?;
            }
        }
    }
    let h = h_value(&s, 0.5);
    check(h == 2f64.powi(-20), format!("h(0.5) = {h:e}"))?;
    let prof = covering_profile(&s, &[0.5]).unwrap();
    check(prof[0].greedy_size == 20 && prof[0].net_size == 20, format!("covering size {}", prof[0].greedy_size))?;
    Ok("Delta = 1, h(0.5) = 2^-20, 0.5-net of size 20".into())
}

fn c3_integrability() -> Outcome {
    let t = Instant::now();
    let gauss = |beta: f64, top: f64| {
        generate(&GeneratorSpec::new("gauss_density", &[("beta", beta), ("T", top), ("resolution", 1e3)])).unwrap().space
    };
    let s2 = gauss(2.0, 18.0);
    let r2 = integrability_curve(&s2, 1.0, &(1..=16).map(f64::from).collect::<Vec<_>>(), INTEGRABILITY_TOL).unwrap();
    check(r2.last_doubling_increment < INTEGRABILITY_TOL, format!("beta 2 increment {}", r2.last_doubling_increment))?;
    check(r2.verdict == Verdict::Integrable, "beta 2 not integrable")?;
    let s1 = gauss(1.0, 42.0);
    let r1 = integrability_curve(&s1, 1.0, &(1..=40).map(f64::from).collect::<Vec<_>>(), INTEGRABILITY_TOL).unwrap();
    check(r1.last_decade_increment > 10.0 * INTEGRABILITY_TOL, format!("beta 1 increment {}", r1.last_decade_increment))?;
    check(r1.verdict == Verdict::Divergent, "beta 1 not flagged divergent")?;
    let el = t.elapsed();
    check(el < INTEGRABILITY_BUDGET, format!("runtime {el:?}"))?;
    Ok(format!(
        "beta 2 last doubling {:.2e}, beta 1 last decade {:.3}, {el:.1?}",
        r2.last_doubling_increment, r1.last_decade_increment
    ))
}

fn c4_comb() -> Outcome {
    let r = 0.1;
    let rep = comb_integrability_experiment(4, 2, 32, r).map_err(|e| e.to_string())?;
    let bound = (1.0f64 / 16.0).exp() / r * COMB_SLACK;
    check(rep.j0_term <= bound, format!("J0 term {} > {bound}", rep.j0_term))?;
    check(rep.cauchy, format!("partial sums {:?}", rep.partial_sums))?;
    Ok(format!("J0 term {:.4} <= {bound:.4}, partial sums {:?}", rep.j0_term, rep.partial_sums.iter().map(|p| p.1).collect::<Vec<_>>()))
}

fn c5_identities() -> Outcome {
    let t = Instant::now();
    let mut r = rng(5);
    let vals = [1.0, 1.5, 2.0, f64::INFINITY];
    let mut worst: f64 = 0.0;
    for case in 0..IDENTITY_CASES {
        let n = r.random_range(2..=12);
        let s = random_dense(&mut r, n, case % 3 == 0);
        let u = random_u(&mut r, n);
        let (p, q) = (vals[case % 4], vals[(case / 4) % 4]);
        let rep = embs_check(&s, &u, 0.8, 0.5, p, q, 2.0).map_err(|e| format!("case {case}: {e}"))?;
        for it in rep.items.iter().filter(|i| i.equality) {
            worst = worst.max((it.lhs - it.rhs).abs() / it.lhs.abs().max(it.rhs.abs()).max(1e-300));
        }
        let failed: Vec<&str> = rep.items.iter().filter(|i| !i.holds).map(|i| i.item.as_str()).collect();
        check(failed.is_empty(), format!("case {case} (n {n}, p {p}, q {q}): items {failed:?} fail"))?;
    }
    let el = t.elapsed();
    check(el < IDENTITY_BUDGET, format!("runtime {el:?}"))?;
    Ok(format!("{IDENTITY_CASES} instances, worst relative equality error {worst:.1e}, {el:.1?}"))
}

fn c6_oracle() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for case in 0..ORACLE_CASES {
        let n = r.random_range(2..=4);
        let s = random_dense(&mut r, n, case % 2 == 0);
        let u = random_u(&mut r, n);
        let alpha = [0.5, 1.0, 2.0][case % 3];
        let p = [1.0, 1.5, 2.0, 4.0][case % 4];
        let c: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { (u[i] - u[j]).abs() / s.dist(i, j).min(s.dist(j, i)).powf(alpha) }).collect())
            .collect();
        let want = sobolev_oracle(s.mu(), &c, p);
        let got = min_gradient_sobolev(&s, &u, alpha, p).map_err(|e| e.to_string())?;
        check(got.solver.status == Status::Certified, format!("case {case} not certified"))?;
        worst = worst.max((got.seminorm - want).abs());
        check((got.seminorm - want).abs() <= ORACLE_TOL, format!("case {case}: {} vs {want}", got.seminorm))?;
    }
    Ok(format!("{ORACLE_CASES} instances, worst absolute difference {worst:.1e}"))
}

fn c7_key_inequality() -> Outcome {
    let mut r = rng(7);
    let mut tightest = f64::INFINITY;
    for case in 0..KEY_CASES {
        let n = r.random_range(2..=10);
        let s = random_dense(&mut r, n, case % 2 == 0);
        let u = random_u(&mut r, n);
        let alpha = 0.25 + r.random::<f64>() * 1.5;
        let p = 0.5 + r.random::<f64>() * 3.0;
        let mut g = pointwise_sup_gradient(&s, &u, alpha, &[]);
        for v in g.iter_mut() {
            *v *= 1.0 + r.random::<f64>();
        }
        let d_set: Vec<usize> = (0..n).filter(|_| r.random_bool(0.5)).collect();
        let radius = 0.05 + r.random::<f64>() * 3.0;
        let beta = [0.5, 1.0, 2.0][case % 3];
        let chain = chain_metric(&s, beta).unwrap();
        let nu: Option<Vec<f64>> = (case % 2 == 1).then(|| s.mu().iter().map(|m| m * r.random::<f64>() * 3.0).collect());
        let k = key_inequality_check(&s, &u, &g, &d_set, radius, alpha, p, &chain, nu.as_deref()).map_err(|e| format!("case {case}: {e}"))?;
        check(k.holds, format!("case {case}: lhs {} > rhs {}", k.lhs, k.rhs))?;
        if k.lhs > 0.0 {
            tightest = tightest.min(k.rhs / k.lhs);
        }
    }
    Ok(format!("{KEY_CASES} cases, zero violations, smallest rhs/lhs {tightest:.3}"))
}

fn c8_witnesses() -> Outcome {
    let s = discrete_n(12).unwrap();
    let w = separated_bump_witness(&s, 0.4, 1.0, 2.0).map_err(|e| e.to_string())?;
    let m = w.centers.len();
    check(m == 12, format!("{m} witnesses"))?;
    check(w.disjoint_balls, "balls overlap")?;
    for k in 0..m {
        for l in k + 1..m {
            let d: f64 = (0..s.len()).map(|x| s.mu()[x] * (w.sequence.functions[k][x] - w.sequence.functions[l][x]).powi(2)).sum();
            check((d - 2.0).abs() <= WITNESS_TOL, format!("pair ({k}, {l}): {d}"))?;
        }
    }
    check(w.sequence.norm_bound.is_finite(), "separated norm bound")?;

    let t = dyadic_tail(8).unwrap();
    let radii = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    let tw = tail_bump_witness(&t, 0, &radii, 0.5, 2.0).map_err(|e| e.to_string())?;
    for (rad, mass) in radii.iter().zip(&tw.tail_masses) {
        check((mass - 1.0).abs() <= WITNESS_TOL, format!("tail mass at R = {rad}: {mass}"))?;
    }
    let ratio = tw.ratios.iter().copied().fold(0.0, f64::max);
    check(ratio <= 4.0, format!("ratio {ratio}"))?;
    let norms = &tw.sequence.member_norms;
    let (lo, hi) = norms.iter().fold((f64::INFINITY, 0.0f64), |a, &v| (a.0.min(v), a.1.max(v)));
    check(hi.is_finite() && hi <= 2.0 * lo, format!("tail norms {norms:?}"))?;
    Ok(format!("12 bumps with pairwise gap 2, tail masses 1, ratio {ratio:.3} <= 4, norms in [{lo:.3}, {hi:.3}]"))
}

/// Independent check of an emitted certificate.
fn audit_certificate(s: &FiniteQMMSpace, family: &[Vec<f64>], eps: f64, c: &qmms_core::compactness::FrechetCertificate) -> Result<(), String> {
    let n = s.len();
    let mu = s.mu();
    let delta = eps / (1.0 + 2.0 * s.total_mass());
    let m = (c.lambda / delta).ceil().max(1.0);
    check((c.delta - delta).abs() <= 1e-15 * delta && c.m as f64 == m, "delta or M differ from the construction")?;
    let mut seen = vec![0usize; n];
    for cell in &c.cells {
        for &x in cell {
            seen[x] += 1;
        }
    }
    check(seen.iter().all(|&k| k == 1), "cells do not partition the space")?;
    for (i, u) in family.iter().enumerate() {
        let e = &c.exceptional[i];
        let e_mass: f64 = e.iter().map(|&x| mu[x]).sum();
        check(e_mass < delta, format!("member {i}: exceptional mass {e_mass}"))?;
        let mut step = vec![0.0; n];
        for (ci, cell) in c.cells.iter().enumerate() {
            let kept: Vec<usize> = cell.iter().copied().filter(|x| !e.contains(x)).collect();
            for &x in &kept {
                check(u[x].abs() <= c.lambda, format!("member {i}: |u| above lambda off E"))?;
                for &y in &kept {
                    check((u[x] - u[y]).abs() < delta, format!("member {i}: oscillation in cell {ci}"))?;
                }
            }
            let code = c.net_codes[i][ci];
            check((code.abs() as f64) <= m, format!("member {i}: code {code} beyond M"))?;
            for &x in cell {
                step[x] = delta * code as f64;
            }
        }
        let d: f64 = (0..n).map(|x| mu[x] * (u[x] - step[x]).abs() / (1.0 + (u[x] - step[x]).abs())).sum();
        check(d <= eps, format!("member {i}: d_L0 to net {d} > {eps}"))?;
    }
    let mut codes = c.net_codes.clone();
    codes.sort();
    codes.dedup();
    let log_bound = c.cells.len() as f64 * (2.0 * m + 1.0).ln();
    check((codes.len() as f64).ln() <= log_bound, "net larger than (2M+1)^cells")?;
    Ok(())
}

fn c9_frechet() -> Outcome {
    let mut r = rng(9);
    let (mut certs, mut refusals) = (0, 0);
    for fam in 0..FRECHET_FAMILIES {
        let s = match fam % 3 {
            0 => uniform_grid(r.random_range(8..=40), 1.0).unwrap(),
            1 => random_euclidean(r.random_range(6..=30), 2, fam as u64).unwrap(),
            _ => {
                let n = r.random_range(4..=20);
                random_dense(&mut r, n, true)
            }
        };
        let n = s.len();
        let members = r.random_range(1..=8);
        let family: Vec<Vec<f64>> = (0..members)
            .map(|_| {
                let (a, b, k) = (r.random::<f64>() * 2.0 - 1.0, r.random::<f64>(), r.random_range(1..=4) as f64);
                (0..n).map(|x| a * (k * x as f64 / n as f64 + b).sin() + if r.random_bool(0.1) { 3.0 } else { 0.0 }).collect()
            })
            .collect();
        let eps = [0.5, 0.2, 0.05][fam % 3];
        let budget = r.random_range(1..=n);
        match frechet_certify(&s, &family, eps, budget, &FrechetOptions::default()).map_err(|e| e.to_string())? {
            FrechetOutcome::Certificate(c) => {
                check(c.verified, format!("family {fam}: certificate not self-verified"))?;
                audit_certificate(&s, &family, eps, &c).map_err(|e| format!("family {fam}: {e}"))?;
                certs += 1;
            }
            FrechetOutcome::Refusal(_) => refusals += 1,
        }
    }
    check(certs > 0, "no certificate emitted")?;
    Ok(format!("{certs} certificates audited, {refusals} refusals, zero failures"))
}

fn c10_regularization() -> Outcome {
    let mut r = rng(10);
    let mut spaces: Vec<FiniteQMMSpace> = (0..20).map(|i| random_dense(&mut r, 3 + i % 10, i % 2 == 0)).collect();
    spaces.push(discrete_n(8).unwrap());
    spaces.push(uniform_grid(16, 1.0).unwrap());
    spaces.push(uniform_grid(12, 0.5).unwrap());
    let mut worst_snow: f64 = 0.0;
    for (si, s) in spaces.iter().enumerate() {
        for beta in [0.3, 0.7, 1.0, 1.6, 3.0] {
            let c = chain_metric(s, beta).unwrap();
            let n = s.len();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        check(c.sigma(i, j) <= c.sigma(i, k) + c.sigma(k, j), format!("space {si} beta {beta}: triangle ({i},{j},{k})"))?;
                    }
                }
            }
            for sf in [0.5, 0.8] {
                let snow = snowflake(s, sf).unwrap();
                let a = chain_metric(&snow, beta).unwrap().distortion;
                let b = chain_metric(s, sf * beta).unwrap().distortion;
                worst_snow = worst_snow.max((a - b).abs() / b);
                check((a - b).abs() <= SNOWFLAKE_TOL * b, format!("space {si}: snowflake {a} vs {b}"))?;
            }
        }
    }
    let triple = FiniteQMMSpace::from_line(None, vec![0.0, 0.5, 1.0], 1.0, vec![1.0; 3]).unwrap();
    for beta in [1.0, 1.5, 2.0, 3.0, 5.0] {
        let d = chain_metric(&triple, beta).unwrap().distortion;
        let want = 2f64.powf(beta - 1.0);
        check((d - want).abs() <= COLLINEAR_TOL * want, format!("collinear beta {beta}: {d} vs {want}"))?;
    }
    Ok(format!("{} spaces, triangle exact, worst snowflake error {worst_snow:.1e}, collinear 2^(beta-1)", spaces.len()))
}

fn c11_interpolation() -> Outcome {
    let mut r = rng(11);
    for case in 0..INTERPOLATION_CASES {
        let n = r.random_range(1..=15);
        let mu: Vec<f64> = (0..n).map(|_| 0.01 + r.random::<f64>() * 2.0).collect();
        let f: Vec<f64> = (0..n).map(|_| (r.random::<f64>() * 2.0 - 1.0) * 10f64.powf(r.random::<f64>() * 4.0 - 2.0)).collect();
        let p = 0.3 + r.random::<f64>() * 3.0;
        let pt = p * (1.01 + r.random::<f64>() * 2.0);
        let ps = if case % 5 == 0 { f64::INFINITY } else { pt * (1.01 + r.random::<f64>() * 2.0) };
        let c = interpolation_check(&f, p, ps, pt, &mu).map_err(|e| e.to_string())?;
        check(c.holds, format!("case {case}: {} > {}", c.lhs, c.rhs))?;
        let h = holder_lower_check(&f, p, pt, &mu).map_err(|e| e.to_string())?;
        check(h.holds, format!("case {case}: Hölder {} > {}", h.lhs, h.rhs))?;
    }
    let mu = [0.37, 0.21, 0.42];
    let mut worst: f64 = 0.0;
    for (p, pt, ps) in [(1.0, 2.0, 4.0), (1.5, 2.5, 7.0), (0.5, 1.0, f64::INFINITY), (2.0, 3.0, 3.5)] {
        for i in 0..3 {
            let mut f = [0.0; 3];
            f[i] = 1.0;
            let c = interpolation_check(&f, p, ps, pt, &mu).unwrap();
            let inv_s = if ps.is_infinite() { 0.0 } else { 1.0 / ps };
            let theta = (1.0 / pt - inv_s) / (1.0 / p - inv_s);
            let closed = (mu[i].powf(1.0 / p)).powf(theta) * mu[i].powf(inv_s).powf(1.0 - theta);
            worst = worst.max((c.lhs - mu[i].powf(1.0 / pt)).abs()).max((c.rhs - closed).abs()).max((c.lhs - c.rhs).abs());
        }
    }
    check(worst <= ATOM_TOL, format!("atom identity error {worst:e}"))?;
    let bad = interpolation_check(&[1.0], 2.0, 4.0, 1.0, &[1.0]);
    check(bad.is_err(), "bad exponents accepted")?;
    Ok(format!("{INTERPOLATION_CASES} cases hold, atom identity error {worst:.1e}"))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("doubling bounds on half-line densities", c1_doubling_bounds),
        ("discrete space exactness", c2_discrete_exactness),
        ("integrability dichotomy", c3_integrability),
        ("infinite comb", c4_comb),
        ("norm identities and embeddings", c5_identities),
        ("solver against oracle", c6_oracle),
        ("key inequality", c7_key_inequality),
        ("witness sequences", c8_witnesses),
        ("Frechet round trip", c9_frechet),
        ("regularization", c10_regularization),
        ("interpolation", c11_interpolation),
    ];
    let mut failed = Vec::new();
    // written to the raw handle so the lines survive output capture
    let mut err = std::io::stderr();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let line = match &res {
            Ok(detail) => format!("PASS {:>2} {name}: {detail}\n", i + 1),
            Err(why) => {
                failed.push(i + 1);
                format!("FAIL {:>2} {name}: {why}\n", i + 1)
            }
        };
        err.write_all(line.as_bytes()).unwrap();
    }
    assert!(failed.is_empty(), "criteria {failed:?} failed");
}
