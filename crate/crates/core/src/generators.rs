//! Parametric example spaces.
//!
//! Densities on the half-line are discretized with atoms at grid midpoints
//! carrying `density(mid) * h`. Parameters whose atoms would underflow or
//! overflow `f64` are rejected rather than silently truncated.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::FiniteQMMSpace;

/// Name plus numeric parameters, e.g. `exp_density` with `beta = 0.5`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl GeneratorSpec {
    pub fn new(name: &str, params: &[(&str, f64)]) -> Self {
        Self { name: name.to_string(), params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn count(&self, key: &str, default: usize, min: usize) -> Result<usize> {
        let v = self.get(key, default as f64);
        if v.fract() != 0.0 || v < min as f64 || v > 1e9 {
            return Err(Error::InvalidParams(format!("{key} must be an integer >= {min}")));
        }
        Ok(v as usize)
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.get(key, default);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParams(format!("{key} must be positive")));
        }
        Ok(v)
    }
}

pub const GENERATOR_NAMES: &[&str] = &[
    "euclidean_grid",
    "snowflake_grid",
    "discrete_N",
    "exp_density",
    "gauss_density",
    "inv_exp_density",
    "infinite_comb",
    "ultrametric_cantor",
    "dyadic_tail",
    "random_euclidean",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Closed-form bound taken over from the analysis of the example.
    ClosedFormBound,
    /// Follows from a short computation on the discretization.
    Derived,
    Trivial,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CardEntry {
    pub claim: String,
    pub provenance: Provenance,
    pub reference: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceCard {
    pub generator: GeneratorSpec,
    pub entries: Vec<CardEntry>,
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub space: FiniteQMMSpace,
    pub card: ReferenceCard,
}

fn entry(claim: &str, provenance: Provenance, reference: &str) -> CardEntry {
    CardEntry { claim: claim.into(), provenance, reference: reference.into() }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    use Provenance::*;
    let (space, entries) = match spec.name.as_str() {
        "euclidean_grid" => {
            let n = spec.count("n", 10, 2)?;
            let s = uniform_grid(n, 1.0)?;
            (s, vec![entry("C_d = 2 for n >= 3", Trivial, "triangle inequality on the line, equality at midpoints")])
        }
        "snowflake_grid" => {
            let n = spec.count("n", 10, 2)?;
            let s = spec.positive("s", 0.5)?;
            let sp = uniform_grid(n, s)?;
            (sp, vec![entry("C_d = 2^s for n >= 3", ClosedFormBound, "snowflake of the line: C_{|x-y|^s} = 2^s")])
        }
        "discrete_N" => {
            let n = spec.count("n", 10, 2)?;
            (
                discrete_n(n)?,
                vec![
                    entry("Delta_c(delta) = 1 for every delta in (0, 1/c]", ClosedFormBound, "discrete metric on N with mu({n}) = 2^-n"),
                    entry("mu is not doubling", ClosedFormBound, "discrete metric on N with mu({n}) = 2^-n"),
                    entry("B(1, 2) is the whole space and is not totally bounded", ClosedFormBound, "discrete metric on N with mu({n}) = 2^-n"),
                ],
            )
        }
        "exp_density" => {
            let beta = spec.positive("beta", 0.5)?;
            let s = density_space(spec, |x| x.powf(beta))?;
            let mut e = vec![entry("mu is not doubling", ClosedFormBound, "density exp(x^beta) on [0, inf)")];
            if beta <= 1.0 {
                e.push(entry("Delta_c(delta) <= 2c exp((c delta)^beta)", ClosedFormBound, "density exp(x^beta), beta <= 1"));
            }
            (s, e)
        }
        "gauss_density" => {
            let beta = spec.positive("beta", 2.0)?;
            let s = density_space(spec, |x| -x.powf(beta))?;
            let mut e = Vec::new();
            if beta <= 1.0 {
                e.push(entry("Delta_c(delta) <= 2c exp(((c+1) delta)^beta)", ClosedFormBound, "density exp(-x^beta), beta <= 1"));
                e.push(entry("mu is not integrable", ClosedFormBound, "unbounded space with a (C_d, delta)-doubling measure"));
            } else {
                e.push(entry("mu(X) < inf and mu is integrable", ClosedFormBound, "density exp(-x^beta), beta > 1"));
            }
            (s, e)
        }
        "inv_exp_density" => {
            let beta = spec.positive("beta", 0.5)?;
            let s = density_space(spec, |x| -x.powf(-beta))?;
            (
                s,
                vec![
                    entry("Delta_c(delta) <= 4c exp((2/delta)^beta)", ClosedFormBound, "density exp(-1/x^beta)"),
                    entry("mu(B(0, 2x)) / mu(B(0, x)) is unbounded as x -> 0", ClosedFormBound, "density exp(-1/x^beta)"),
                ],
            )
        }
        "infinite_comb" => {
            let depth = spec.count("depth", 2, 1)?;
            let branching = spec.count("branching", 2, 1)?;
            let resolution = spec.count("resolution", 8, 1)?;
            let comb = Comb::new(depth, branching, resolution)?;
            let space = comb.space()?;
            (
                space,
                vec![
                    entry("integral over J_0 of 1/mu(B(x, r)) <= e^{1/16}/r for 0 < r < 1/4", ClosedFormBound, "comb with spine density exp(-y^2)"),
                    entry("mu is integrable", ClosedFormBound, "comb with tooth densities exp(-(y+k)^2)"),
                    entry("C~_d = 1 and C_d <= 2", Trivial, "path metric of a tree"),
                ],
            )
        }
        "ultrametric_cantor" => {
            let depth = spec.count("depth", 4, 1)?;
            let branching = spec.count("branching", 2, 2)?;
            let ratio = spec.positive("ratio", 0.5)?;
            (
                cantor(depth, branching, ratio)?,
                vec![
                    entry("C_d = 1", Trivial, "ultrametric"),
                    entry("chain distortion is 1 for every beta", Trivial, "ultrametric powers are ultrametrics"),
                ],
            )
        }
        "dyadic_tail" => {
            let levels = spec.count("levels", 8, 1)?;
            (
                dyadic_tail(levels)?,
                vec![
                    entry("each block [2^k, 2^{k+1}) has mass 2^-k", ClosedFormBound, "density a_k exp(2^k x - 2 4^k)"),
                    entry("mu(X \\ B(0, N)) / mu(X \\ B(0, 2N)) <= 4", ClosedFormBound, "dyadic-tail density, C_d = 2"),
                ],
            )
        }
        "random_euclidean" => {
            let n = spec.count("n", 16, 2)?;
            let dim = spec.count("dim", 2, 1)?;
            let seed = spec.get("seed", 0.0) as u64;
            (random_euclidean(n, dim, seed)?, vec![entry("C_d <= 2", Trivial, "Euclidean metric")])
        }
        other => return Err(Error::InvalidParams(format!("unknown generator {other:?}"))),
    };
    Ok(Generated { space, card: ReferenceCard { generator: spec.clone(), entries } })
}

/// Points `i / n`, `i = 0..n`, each of mass `1/n`, with `d = |x - y|^power`.
pub fn uniform_grid(n: usize, power: f64) -> Result<FiniteQMMSpace> {
    let coords = (0..n).map(|i| i as f64 / n as f64).collect();
    FiniteQMMSpace::from_line(None, coords, power, vec![1.0 / n as f64; n])
}

/// `{1, ..., n}` with the discrete metric and `mu({j}) = 2^-j`.
pub fn discrete_n(n: usize) -> Result<FiniteQMMSpace> {
    let dist = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
    let mu = (1..=n).map(|j| 0.5f64.powi(j as i32)).collect();
    let labels = (1..=n).map(|j| j.to_string()).collect();
    FiniteQMMSpace::from_dense(Some(labels), dist, mu)
}

/// Midpoint discretization of `exp(log_density(x)) dx` on `[0, T)`.
fn density_space(spec: &GeneratorSpec, log_density: impl Fn(f64) -> f64) -> Result<FiniteQMMSpace> {
    let t = spec.positive("T", 10.0)?;
    let res = spec.positive("resolution", 1e4)?;
    let n = (t * res).round() as usize;
    if n < 2 {
        return Err(Error::InvalidParams("need at least two grid cells".into()));
    }
    let h = t / n as f64;
    let mut coords = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    for i in 0..n {
        let x = (i as f64 + 0.5) * h;
        let w = (log_density(x) + h.ln()).exp();
        if !(w >= f64::MIN_POSITIVE && w.is_finite()) {
            return Err(Error::InvalidParams(format!("atom at x = {x} is not representable (weight {w:e})")));
        }
        coords.push(x);
        mu.push(w);
    }
    FiniteQMMSpace::from_line(None, coords, 1.0, mu)
}

/// Words of length `depth` over `branching` letters with
/// `d(x, y) = ratio^(common prefix length)`.
pub fn cantor(depth: usize, branching: usize, ratio: f64) -> Result<FiniteQMMSpace> {
    if ratio >= 1.0 {
        return Err(Error::InvalidParams("ratio must be below 1".into()));
    }
    let n = branching.checked_pow(depth as u32).filter(|&n| n <= 4096).ok_or_else(|| Error::InvalidParams("too many points".into()))?;
    let digits = |mut i: usize| {
        let mut v = vec![0; depth];
        for k in (0..depth).rev() {
            v[k] = i % branching;
            i /= branching;
        }
        v
    };
    let words: Vec<Vec<usize>> = (0..n).map(digits).collect();
    let dist = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        let lcp = words[i].iter().zip(&words[j]).take_while(|(a, b)| a == b).count();
                        ratio.powi(lcp as i32)
                    }
                })
                .collect()
        })
        .collect();
    let labels = words.iter().map(|w| w.iter().map(|d| d.to_string()).collect::<String>()).collect();
    FiniteQMMSpace::from_dense(Some(labels), dist, vec![1.0 / n as f64; n])
}

/// Density 1 on `[0, 1)` and `a_k exp(2^k x - 2 4^k)` on `[2^k, 2^{k+1})`
/// with `a_k = e^{4^k} / (e^{4^k} - 1)`, so block `k` has mass `2^-k`.
///
/// Atoms sit at the left ends of integer cells and carry the exact cell
/// integral. Leading cells of a block whose mass is below `f64` range are
/// merged into the next cell (their true mass is below `e^-700`). The mass
/// beyond `2^levels` is a single atom at `2^levels`.
pub fn dyadic_tail(levels: usize) -> Result<FiniteQMMSpace> {
    // block 2^k keeps a representable last cell only while 2^k <= 700
    if levels > 9 {
        return Err(Error::InvalidParams("levels must be at most 9".into()));
    }
    let mut coords = vec![0.0];
    let mut mu = vec![1.0];
    for k in 0..levels {
        let p = 2f64.powi(k as i32);
        let q = p * p;
        // a_k 2^-k exp(2^k x - 2 4^k) is the antiderivative (up to a constant)
        let a = 1.0 / (-(-q).exp_m1());
        let anti = |x: f64| a / p * (p * x - 2.0 * q).exp();
        let lo = p as usize;
        let hi = 2 * lo;
        let first = (lo..hi).find(|&m| p * m as f64 - 2.0 * q >= -700.0).unwrap_or(hi - 1).max(lo + 1);
        // cell [lo, first) then unit cells
        let mut left = lo as f64;
        let bounds = std::iter::once(first).chain(first + 1..=hi);
        for right in bounds {
            let r = right as f64;
            let m = if left == lo as f64 {
                // integral from the block start, where exp(-4^k) contributes
                a / p * ((p * r - 2.0 * q).exp() - (-q).exp())
            } else {
                anti(r) - anti(left)
            };
            coords.push(left);
            mu.push(m);
            left = r;
        }
    }
    let top = 2f64.powi(levels as i32);
    coords.push(top);
    mu.push(2f64.powi(1 - levels as i32));
    FiniteQMMSpace::from_line(None, coords, 1.0, mu)
}

pub fn random_euclidean(n: usize, dim: usize, seed: u64) -> Result<FiniteQMMSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    let dist = pts
        .iter()
        .map(|a| pts.iter().map(|b| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()).collect())
        .collect();
    FiniteQMMSpace::from_dense(None, dist, vec![1.0 / n as f64; n])
}

/// One segment of the comb: the spine (`k = 0`) or a tooth.
#[derive(Clone, Debug)]
pub struct Segment {
    /// Enumeration index; tooth `k` carries density `exp(-(y + k)^2)`.
    pub k: usize,
    /// Letters (indices into the tooth alphabet) of the tooth's word.
    pub word: Vec<usize>,
    pub parent: Option<usize>,
    /// Position on the parent segment where the tooth is attached.
    pub attach: f64,
    pub length: f64,
}

/// A point of the comb: segment index and position on that segment.
#[derive(Clone, Copy, Debug)]
pub struct CombPoint {
    pub segment: usize,
    pub t: f64,
    /// `ln` of the atom's mass.
    pub log_mass: f64,
}

/// Finite truncation of the comb: the spine `(0, 1/4)` with density
/// `exp(-y^2)` and, for every word `(d_1..d_n)` of length `n <= depth` over
/// an alphabet of `branching` equally spaced values in `(0, 1/4)`, a tooth
/// of length `2^(-n-2)` attached at `d_n / 2^(n-1)` on its parent.
#[derive(Clone, Debug)]
pub struct Comb {
    pub alphabet: Vec<f64>,
    pub segments: Vec<Segment>,
    pub points: Vec<CombPoint>,
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

impl Comb {
    pub fn new(depth: usize, branching: usize, resolution: usize) -> Result<Self> {
        if branching > PRIMES.len() {
            return Err(Error::InvalidParams(format!("branching must be at most {}", PRIMES.len())));
        }
        let teeth: usize = (1..=depth).map(|n| branching.pow(n as u32)).sum();
        if teeth > 5000 {
            return Err(Error::InvalidParams("too many teeth".into()));
        }
        let alphabet: Vec<f64> = (1..=branching).map(|j| j as f64 / (4.0 * (branching + 1) as f64)).collect();
        let mut words: Vec<Vec<usize>> = Vec::new();
        let mut frontier: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..depth {
            let mut next = Vec::new();
            for w in &frontier {
                for l in 0..branching {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
            words.extend(next.iter().cloned());
            frontier = next;
        }
        // prime coding: letter j <-> j-th prime; order by code, then by word
        let code = |w: &Vec<usize>| w.iter().map(|&l| PRIMES[l] as u128).product::<u128>();
        words.sort_by(|a, b| code(a).cmp(&code(b)).then_with(|| a.cmp(b)));
        let mut segments = vec![Segment { k: 0, word: vec![], parent: None, attach: 0.0, length: 0.25 }];
        let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        index.insert(vec![], 0);
        for (rank, w) in words.iter().enumerate() {
            index.insert(w.clone(), rank + 1);
        }
        for w in &words {
            let n = w.len();
            let parent = index[&w[..n - 1].to_vec()];
            let attach = alphabet[w[n - 1]] / 2f64.powi(n as i32 - 1);
            segments.push(Segment { k: index[w], word: w.clone(), parent: Some(parent), attach, length: 2f64.powi(-(n as i32) - 2) });
        }
        let mut points = Vec::new();
        for (s, seg) in segments.iter().enumerate() {
            let h = seg.length / resolution as f64;
            for i in 0..resolution {
                let t = (i as f64 + 0.5) * h;
                let y = t + seg.k as f64;
                points.push(CombPoint { segment: s, t, log_mass: -y * y + h.ln() });
            }
        }
        Ok(Self { alphabet, segments, points })
    }

    /// Chain `(segment, position)` from a point up to the spine.
    fn chain(&self, p: &CombPoint) -> Vec<(usize, f64)> {
        let mut out = vec![(p.segment, p.t)];
        let mut s = p.segment;
        while let Some(par) = self.segments[s].parent {
            out.push((par, self.segments[s].attach));
            s = par;
        }
        out
    }

    /// Path length in the tree.
    pub fn dist(&self, a: usize, b: usize) -> f64 {
        let ca = self.chain(&self.points[a]);
        let cb = self.chain(&self.points[b]);
        // walk both chains up to the lowest common segment
        let mut up_a = 0.0;
        for &(sa, ta) in &ca {
            let mut up_b = 0.0;
            for &(sb, tb) in &cb {
                if sa == sb {
                    return up_a + up_b + (ta - tb).abs();
                }
                up_b += tb;
            }
            up_a += ta;
        }
        unreachable!("every chain ends at the spine")
    }

    pub fn log_masses(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.log_mass).collect()
    }

    pub fn dist_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.points.len();
        (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { self.dist(i, j) }).collect()).collect()
    }

    /// The comb as a space; fails when tooth weights underflow.
    pub fn space(&self) -> Result<FiniteQMMSpace> {
        let mu: Vec<f64> = self.points.iter().map(|p| p.log_mass.exp()).collect();
        if let Some(i) = mu.iter().position(|&m| m < f64::MIN_POSITIVE) {
            return Err(Error::InvalidParams(format!(
                "comb weight of point {i} underflows; use the log-domain experiment for deep combs"
            )));
        }
        let labels = self
            .points
            .iter()
            .map(|p| format!("J{}:{}", self.segments[p.segment].k, p.t))
            .collect();
        FiniteQMMSpace::from_dense(Some(labels), self.dist_matrix(), mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_n_weights() {
        let g = generate(&GeneratorSpec::new("discrete_N", &[("n", 10.0)])).unwrap();
        assert_eq!(g.space.len(), 10);
        assert_eq!(g.space.mu()[0], 0.5);
        assert_eq!(g.space.mu()[9], 2f64.powi(-10));
        assert_eq!(g.card.entries.len(), 3);
    }

    #[test]
    fn cantor_is_ultrametric() {
        let s = cantor(3, 3, 0.4).unwrap();
        assert_eq!(s.len(), 27);
        assert_eq!(s.c_d(), 1.0);
    }

    #[test]
    fn dyadic_blocks_have_dyadic_mass() {
        let s = dyadic_tail(6).unwrap();
        let c = s.coords().unwrap();
        for k in 0..6 {
            let lo = 2f64.powi(k);
            let m: f64 = c.iter().zip(s.mu()).filter(|(&x, _)| x >= lo && x < 2.0 * lo).map(|(_, &m)| m).sum();
            assert!((m - 2f64.powi(-k)).abs() < 1e-14, "block {k}: {m}");
        }
        assert!((s.total_mass() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn underflow_is_rejected() {
        let spec = GeneratorSpec::new("inv_exp_density", &[("beta", 1.0), ("T", 1.0), ("resolution", 1e4)]);
        assert!(matches!(generate(&spec), Err(Error::InvalidParams(_))));
        let spec = GeneratorSpec::new("infinite_comb", &[("depth", 4.0), ("branching", 2.0), ("resolution", 2.0)]);
        assert!(matches!(generate(&spec), Err(Error::InvalidParams(_))));
        assert!(generate(&GeneratorSpec::new("nope", &[])).is_err());
    }

    #[test]
    fn comb_prefixes_precede_extensions() {
        let c = Comb::new(3, 3, 1).unwrap();
        for s in &c.segments[1..] {
            let p = s.parent.unwrap();
            assert!(c.segments[p].k < s.k);
        }
        assert_eq!(c.segments.len(), 1 + 3 + 9 + 27);
    }
}
