//! Numerical check of the elementary embeddings between the Hajłasz scales.
//!
//! * i) `N^a_{p,inf} <= N^a_{p,q}` and ii) `M^a_{p,inf} <= M^a_{p,q}`
//! * iii) `M^a_{p,inf} = M^{a,p}` and iv) `M^a_{p,p} = N^a_{p,p}`
//! * v) `N^{a+s}_{p,inf}` into `N^a_{p,r}` with
//!   `||u||_{N^a_{p,r}} <= (A ||u||^r_{N^{a+s}_{p,inf}} + B ||u||_p^r)^(1/r)`
//! * vi) `M^{a+s,p}` into `M^a_{p,r}` with
//!   `||u||^p_{M^a_{p,r}} <= 2^(p/r) (A^(p/r) ||g||_p^p + B^(p/r) ||u||_p^p)`
//!
//! where `A = 1 / (1 - 2^(-r s))` and `B = 1 / (1 - 2^(-r a))`. For v) and
//! vi) the explicit gradient `h_k = 2^(-k s) g_k` (`k >= 0`),
//! `h_k = 2^((k+1) a) |u|` (`k < 0`) is built, checked for feasibility and
//! its norm compared against the bound. At `p = inf` only the items defined
//! there are checked.

use serde::{Deserialize, Serialize};

use super::{
    gradient_norm, lp_norm, max_violation, min_gradient_besov, min_gradient_sobolev, min_gradient_tl, space_levels,
    GradientSequence, NormKind, FEASIBILITY_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::space::FiniteQMMSpace;

/// Relative tolerance for the computed-value equalities iii) and iv).
pub const EQUALITY_TOLERANCE: f64 = 1e-6;
/// Relative slack for inequalities between certified values.
pub const INEQUALITY_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbsItem {
    pub item: String,
    pub statement: String,
    pub lhs: f64,
    pub rhs: f64,
    pub equality: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbsReport {
    pub alpha: f64,
    pub sigma: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub items: Vec<EmbsItem>,
    pub all_hold: bool,
}

fn leq(a: f64, b: f64) -> bool {
    a <= b * (1.0 + INEQUALITY_SLACK) + 1e-12
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQUALITY_TOLERANCE * a.abs().max(b.abs()) + 1e-12
}

fn item(name: &str, statement: &str, lhs: f64, rhs: f64, equality: bool, extra: bool) -> EmbsItem {
    let holds = extra && if equality { close(lhs, rhs) } else { leq(lhs, rhs) };
    EmbsItem { item: name.into(), statement: statement.into(), lhs, rhs, equality, holds }
}

/// `h_k` on every level of the space: `2^(-k sigma) g_k` for `k >= 0` and
/// `2^((k+1) alpha) |u|` below.
pub fn smoothness_trade(space: &FiniteQMMSpace, u: &[f64], g: &GradientSequence, alpha: f64, sigma: f64) -> GradientSequence {
    let n = space.len();
    let zero = vec![0.0; n];
    let levels = space_levels(space);
    let rows = levels
        .iter()
        .map(|&k| {
            if k >= 0 {
                let f = 2f64.powf(-(k as f64) * sigma);
                g.at(k).unwrap_or(&zero).iter().map(|x| f * x).collect()
            } else {
                let f = 2f64.powf((k as f64 + 1.0) * alpha);
                u.iter().map(|x| f * x.abs()).collect()
            }
        })
        .collect();
    GradientSequence { levels, g: rows }
}

pub fn embs_check(space: &FiniteQMMSpace, u: &[f64], alpha: f64, sigma: f64, p: f64, q: f64, r: f64) -> Result<EmbsReport> {
    if !(sigma > 0.0) || !(r > 0.0 && r.is_finite()) || !(q > 0.0) || !(p >= 1.0) {
        return Err(Error::InvalidParams("need sigma > 0, 0 < r < inf, q > 0, p >= 1".into()));
    }
    // the TL kind at p = inf is only defined for q = inf, so ii) and vi)
    // are skipped there
    let tl_finite = p.is_finite();
    let mu = space.mu();
    let up = lp_norm(u, p, mu);
    let mut items = Vec::new();

    let n_inf = min_gradient_besov(space, u, alpha, p, f64::INFINITY)?.seminorm;
    let n_q = min_gradient_besov(space, u, alpha, p, q)?.seminorm;
    items.push(item("i", "N^a_{p,inf} <= N^a_{p,q}", n_inf, n_q, false, true));

    let m_inf = min_gradient_tl(space, u, alpha, p, f64::INFINITY)?.seminorm;
    if tl_finite || q.is_infinite() {
        let m_q = min_gradient_tl(space, u, alpha, p, q)?.seminorm;
        items.push(item("ii", "M^a_{p,inf} <= M^a_{p,q}", m_inf, m_q, false, true));
    }

    let sob = min_gradient_sobolev(space, u, alpha, p)?;
    items.push(item("iii", "M^a_{p,inf} = M^{a,p}", m_inf, sob.seminorm, true, true));

    let m_pp = min_gradient_tl(space, u, alpha, p, p)?.seminorm;
    let n_pp = min_gradient_besov(space, u, alpha, p, p)?.seminorm;
    items.push(item("iv", "M^a_{p,p} = N^a_{p,p}", m_pp, n_pp, true, true));

    let a = 1.0 / (1.0 - 2f64.powf(-r * sigma));
    let b = 1.0 / (1.0 - 2f64.powf(-r * alpha));
    let scale = u.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);

    let fine = min_gradient_besov(space, u, alpha + sigma, p, f64::INFINITY)?;
    let bound_v = (a * fine.seminorm.powf(r) + b * up.powf(r)).powf(1.0 / r);
    let h = smoothness_trade(space, u, &fine.optimal_g, alpha, sigma);
    let h_ok = max_violation(space, u, alpha, &h) <= FEASIBILITY_TOLERANCE * scale;
    let h_norm = gradient_norm(&h, mu, p, r, NormKind::NBesov);
    let n_r = min_gradient_besov(space, u, alpha, p, r)?.seminorm;
    items.push(item("v", "N^a_{p,r} <= (A N^{a+s}_{p,inf}^r + B ||u||_p^r)^(1/r)", n_r, bound_v, false, h_ok && leq(h_norm, bound_v)));

    if !tl_finite {
        let all_hold = items.iter().all(|i| i.holds);
        return Ok(EmbsReport { alpha, sigma, p, q, r, items, all_hold });
    }
    let fine_m = min_gradient_sobolev(space, u, alpha + sigma, p)?;
    let g_p = lp_norm(&fine_m.optimal_g.g[0], p, mu);
    let bound_vi =
        (2f64.powf(p / r) * (a.powf(p / r) * g_p.powf(p) + b.powf(p / r) * up.powf(p))).powf(1.0 / p);
    let h = smoothness_trade(space, u, &fine_m.optimal_g, alpha, sigma);
    let h_ok = max_violation(space, u, alpha, &h) <= FEASIBILITY_TOLERANCE * scale;
    let h_norm = gradient_norm(&h, mu, p, r, NormKind::MTriebelLizorkin);
    let m_r = min_gradient_tl(space, u, alpha, p, r)?;
    // below r = 1 the TL value is only an upper bound; the built h still is
    let lhs_vi = if r >= 1.0 { m_r.seminorm } else { m_r.seminorm.min(h_norm) };
    items.push(item(
        "vi",
        "M^a_{p,r}^p <= 2^(p/r) (A^(p/r) ||g||_p^p + B^(p/r) ||u||_p^p)",
        lhs_vi,
        bound_vi,
        false,
        h_ok && leq(h_norm, bound_vi),
    ));

    let all_hold = items.iter().all(|i| i.holds);
    Ok(EmbsReport { alpha, sigma, p, q, r, items, all_hold })
}
