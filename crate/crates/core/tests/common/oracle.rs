//! Exhaustive active-set oracle for `min sum_i mu_i g_i^p` subject to
//! `g_i + g_j >= c_ij`, `g >= 0`, on at most four points.
//!
//! For every subset S of the positive constraints, the equalities of S pin
//! each connected component of the constraint graph to a line
//! `g_v = a_v + s_v t` (or a point when the component has an odd cycle).
//! Points outside S sit at 0. The objective is convex along the line, so the
//! component minimum is found by bisection on the derivative (or at an end
//! for p = 1). Feasible candidates are kept and the smallest value wins.

pub fn sobolev_oracle(mu: &[f64], c: &[Vec<f64>], p: f64) -> f64 {
    let n = mu.len();
    assert!(n <= 5, "oracle is exhaustive");
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let cij = c[i][j].max(c[j][i]);
            if cij > 0.0 {
                pairs.push((i, j, cij));
            }
        }
    }
    if pairs.is_empty() {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << pairs.len()) {
        let active: Vec<(usize, usize, f64)> =
            pairs.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &e)| e).collect();
        if let Some(g) = candidate(n, mu, &active, p) {
            let feasible = pairs.iter().all(|&(i, j, cij)| g[i] + g[j] >= cij * (1.0 - 1e-12) - 1e-14);
            if feasible {
                let v: f64 = (0..n).map(|i| mu[i] * g[i].powf(p)).sum();
                best = best.min(v);
            }
        }
    }
    best.powf(1.0 / p)
}

fn candidate(n: usize, mu: &[f64], active: &[(usize, usize, f64)], p: f64) -> Option<Vec<f64>> {
    let mut g = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(i, j, c) in active {
        adj[i].push((j, c));
        adj[j].push((i, c));
    }
    for root in 0..n {
        if seen[root] || adj[root].is_empty() {
            continue;
        }
        // g_v = a[v] + s[v] * t on this component
        let mut a = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut comp = vec![root];
        let mut fixed_t: Option<f64> = None;
        seen[root] = true;
        s[root] = 1.0;
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for &(v, c) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    a[v] = c - a[u];
                    s[v] = -s[u];
                    comp.push(v);
                } else if s[v] == -s[u] {
                    if (a[u] + a[v] - c).abs() > 1e-12 * (1.0 + c) {
                        return None;
                    }
                } else {
                    let t = (c - a[u] - a[v]) / (2.0 * s[u]);
                    match fixed_t {
                        Some(t0) if (t0 - t).abs() > 1e-12 * (1.0 + t.abs()) => return None,
                        _ => fixed_t = Some(t),
                    }
                }
            }
        }
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for &v in &comp {
            if s[v] > 0.0 {
                lo = lo.max(-a[v]);
            } else {
                hi = hi.min(a[v]);
            }
        }
        if lo > hi + 1e-15 {
            return None;
        }
        let t = match fixed_t {
            Some(t) => {
                if t < lo - 1e-12 || t > hi + 1e-12 {
                    return None;
                }
                t.clamp(lo, hi.max(lo))
            }
            None => {
                let deriv = |t: f64| -> f64 {
                    comp.iter().map(|&v| mu[v] * p * s[v] * (a[v] + s[v] * t).max(0.0).powf(p - 1.0)).sum()
                };
                if p == 1.0 {
                    let slope: f64 = comp.iter().map(|&v| mu[v] * s[v]).sum();
                    if slope > 0.0 { lo } else { hi }
                } else {
                    let (mut l, mut h) = (lo, hi);
                    if deriv(l) >= 0.0 {
                        l
                    } else if deriv(h) <= 0.0 {
                        h
                    } else {
                        for _ in 0..200 {
                            let m = 0.5 * (l + h);
                            if deriv(m) < 0.0 {
                                l = m;
                            } else {
                                h = m;
                            }
                        }
                        0.5 * (l + h)
                    }
                }
            }
        };
        if !t.is_finite() {
            return None;
        }
        for &v in &comp {
            g[v] = (a[v] + s[v] * t).max(0.0);
        }
    }
    Some(g)
}
