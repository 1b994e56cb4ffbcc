//! Finite quasi-metric measure spaces.
//!
//! A space is a finite set of labelled points with a (possibly asymmetric)
//! distance and strictly positive atoms. Distances are stored either as a
//! dense row-major matrix or, for one-dimensional samples, as sorted
//! coordinates with an exponent (`d(x, y) = |x - y|^power`). The line form
//! keeps ball masses at `O(log n)` through prefix sums, which is what makes
//! fine discretizations of densities on the half-line tractable.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Above this size the exact `O(n^2)` scan for line spaces is replaced by a
/// windowed scan; see [`FiniteQMMSpace::quasi_constants`].
const LINE_EXACT_LIMIT: usize = 4096;
const LINE_WINDOW: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    Dense { n: usize, d: Vec<f64> },
    Line { coords: Vec<f64>, power: f64 },
}

#[derive(Clone, Debug)]
pub struct FiniteQMMSpace {
    labels: Vec<String>,
    metric: Metric,
    mu: Vec<f64>,
    prefix: Vec<f64>,
    suffix: Vec<f64>,
    c_d: f64,
    c_tilde: f64,
}

/// An open ball `{j : d(center, j) < radius}`. Center and radius are part
/// of the identity: two balls with equal members but different centers are
/// distinct values.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    pub members: Vec<usize>,
}

/// Real values attached to the points of a space.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionOnSpace {
    pub values: Vec<f64>,
}

impl FunctionOnSpace {
    pub fn new(space: &FiniteQMMSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Malformed(format!(
                "function has {} values, space has {} points",
                values.len(),
                space.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Malformed("function values must be finite".into()));
        }
        Ok(Self { values })
    }
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn check_weights(mu: &[f64]) -> Result<()> {
    for (i, &m) in mu.iter().enumerate() {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::NonpositiveWeight(i));
        }
    }
    Ok(())
}

impl FiniteQMMSpace {
    /// Validates a dense distance matrix and weights.
    pub fn from_dense(labels: Option<Vec<String>>, dist: Vec<Vec<f64>>, mu: Vec<f64>) -> Result<Self> {
        let n = dist.len();
        if n < 2 {
            return Err(Error::Malformed("a space needs at least two points".into()));
        }
        if dist.iter().any(|row| row.len() != n) {
            return Err(Error::Malformed("distance matrix is not square".into()));
        }
        if mu.len() != n {
            return Err(Error::Malformed("weight vector length mismatch".into()));
        }
        let mut d = Vec::with_capacity(n * n);
        for (i, row) in dist.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::NegativeDistance(i, j));
                }
                if i == j && v != 0.0 {
                    return Err(Error::Malformed(format!("dist[{i}][{i}] must be 0")));
                }
                if i != j && v == 0.0 {
                    return Err(Error::ZeroOffDiagonal(i, j));
                }
                d.push(v);
            }
        }
        check_weights(&mu)?;
        let labels = labels.unwrap_or_else(|| default_labels(n));
        if labels.len() != n {
            return Err(Error::Malformed("label count mismatch".into()));
        }
        Ok(Self::assemble(labels, Metric::Dense { n, d }, mu))
    }

    /// Builds a space on points of the real line with `d = |x - y|^power`.
    /// Coordinates are sorted internally (labels and weights follow them).
    pub fn from_line(labels: Option<Vec<String>>, coords: Vec<f64>, power: f64, mu: Vec<f64>) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::Malformed("a space needs at least two points".into()));
        }
        if mu.len() != n {
            return Err(Error::Malformed("weight vector length mismatch".into()));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::InvalidParams("line power must be positive".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Malformed("coordinates must be finite".into()));
        }
        check_weights(&mu)?;
        let labels = labels.unwrap_or_else(|| default_labels(n));
        if labels.len() != n {
            return Err(Error::Malformed("label count mismatch".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| coords[a].total_cmp(&coords[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| coords[i]).collect();
        for w in 0..n - 1 {
            if sorted[w] == sorted[w + 1] {
                return Err(Error::ZeroOffDiagonal(order[w], order[w + 1]));
            }
        }
        let mu: Vec<f64> = order.iter().map(|&i| mu[i]).collect();
        let labels: Vec<String> = order.iter().map(|&i| labels[i].clone()).collect();
        Ok(Self::assemble(labels, Metric::Line { coords: sorted, power }, mu))
    }

    fn assemble(labels: Vec<String>, metric: Metric, mu: Vec<f64>) -> Self {
        let (prefix, suffix) = cumulative(&mu);
        let mut s = Self { labels, metric, mu, prefix, suffix, c_d: 1.0, c_tilde: 1.0 };
        let (c, ct) = s.compute_constants();
        s.c_d = c;
        s.c_tilde = ct;
        s
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn total_mass(&self) -> f64 {
        self.prefix[self.len()]
    }

    pub fn is_line(&self) -> bool {
        matches!(self.metric, Metric::Line { .. })
    }

    /// Sorted coordinates of a line space.
    pub fn coords(&self) -> Option<&[f64]> {
        match &self.metric {
            Metric::Line { coords, .. } => Some(coords),
            Metric::Dense { .. } => None,
        }
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            Metric::Dense { n, d } => d[i * n + j],
            Metric::Line { coords, power } => {
                let g = (coords[i] - coords[j]).abs();
                if *power == 1.0 {
                    g
                } else {
                    g.powf(*power)
                }
            }
        }
    }

    /// Dense copy of the distance matrix.
    pub fn dist_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.dist(i, j)).collect()).collect()
    }

    /// The same space with the distance materialized densely.
    pub fn to_dense(&self) -> Self {
        match &self.metric {
            Metric::Dense { .. } => self.clone(),
            Metric::Line { .. } => {
                let n = self.len();
                let mut d = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        d.push(self.dist(i, j));
                    }
                }
                Self {
                    labels: self.labels.clone(),
                    metric: Metric::Dense { n, d },
                    mu: self.mu.clone(),
                    prefix: self.prefix.clone(),
                    suffix: self.suffix.clone(),
                    c_d: self.c_d,
                    c_tilde: self.c_tilde,
                }
            }
        }
    }

    /// Same points and distance with new weights.
    pub fn with_weights(&self, mu: Vec<f64>) -> Result<Self> {
        if mu.len() != self.len() {
            return Err(Error::Malformed("weight vector length mismatch".into()));
        }
        check_weights(&mu)?;
        let (prefix, suffix) = cumulative(&mu);
        Ok(Self { labels: self.labels.clone(), metric: self.metric.clone(), mu, prefix, suffix, c_d: self.c_d, c_tilde: self.c_tilde })
    }

    /// Restriction to a subset of points (in the given order).
    pub fn subspace(&self, idx: &[usize]) -> Result<Self> {
        let labels: Vec<String> = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let mu: Vec<f64> = idx.iter().map(|&i| self.mu[i]).collect();
        match &self.metric {
            Metric::Line { coords, power } => {
                Self::from_line(Some(labels), idx.iter().map(|&i| coords[i]).collect(), *power, mu)
            }
            Metric::Dense { .. } => {
                let dist = idx.iter().map(|&i| idx.iter().map(|&j| self.dist(i, j)).collect()).collect();
                Self::from_dense(Some(labels), dist, mu)
            }
        }
    }

    /// `(C_d, C~_d)`.
    pub fn quasi_constants(&self) -> (f64, f64) {
        (self.c_d, self.c_tilde)
    }

    pub fn c_d(&self) -> f64 {
        self.c_d
    }

    pub fn c_tilde(&self) -> f64 {
        self.c_tilde
    }

    fn compute_constants(&self) -> (f64, f64) {
        match &self.metric {
            Metric::Dense { n, d } => dense_constants(*n, d),
            Metric::Line { coords, power } => (line_c(coords).powf(*power), 1.0),
        }
    }

    pub fn ball(&self, center: usize, radius: f64) -> Ball {
        let members = match &self.metric {
            Metric::Dense { .. } => (0..self.len()).filter(|&j| self.dist(center, j) < radius).collect(),
            Metric::Line { .. } => {
                let (lo, hi) = self.line_ball_range(center, radius);
                (lo..hi).collect()
            }
        };
        Ball { center, radius, members }
    }

    /// Index range `[lo, hi)` of a line ball; membership is decided with the
    /// same arithmetic as [`Self::dist`].
    fn line_ball_range(&self, center: usize, radius: f64) -> (usize, usize) {
        let n = self.len();
        if radius <= 0.0 {
            return (center, center);
        }
        // distances decrease towards the center on the left, increase on the right
        let left = partition_point(0, center, |j| self.dist(center, j) >= radius);
        let right = partition_point(center + 1, n, |j| self.dist(center, j) < radius);
        (left, right)
    }

    pub fn ball_mass(&self, center: usize, radius: f64) -> f64 {
        match &self.metric {
            Metric::Dense { n, d } => {
                let row = &d[center * n..(center + 1) * n];
                row.iter().zip(&self.mu).filter(|(&x, _)| x < radius).map(|(_, &m)| m).sum()
            }
            Metric::Line { .. } => {
                let (lo, hi) = self.line_ball_range(center, radius);
                self.range_mass(lo, hi)
            }
        }
    }

    /// Mass of the index range `[lo, hi)`. Short ranges are summed directly;
    /// long ones use whichever cumulative array has the smaller operands, so
    /// that tiny balls far out in a light tail keep their relative accuracy.
    pub fn range_mass(&self, lo: usize, hi: usize) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        if hi - lo <= 64 {
            return self.mu[lo..hi].iter().sum();
        }
        if self.suffix[lo] < self.prefix[hi] {
            self.suffix[lo] - self.suffix[hi]
        } else {
            self.prefix[hi] - self.prefix[lo]
        }
    }

    /// `mu(X \ B(center, radius))`, summed without subtracting from the total.
    pub fn tail_mass(&self, center: usize, radius: f64) -> f64 {
        match &self.metric {
            Metric::Dense { n, d } => {
                let row = &d[center * n..(center + 1) * n];
                row.iter().zip(&self.mu).filter(|(&x, _)| x >= radius).map(|(_, &m)| m).sum()
            }
            Metric::Line { .. } => {
                let (lo, hi) = self.line_ball_range(center, radius);
                self.prefix[lo] + self.suffix[hi]
            }
        }
    }

    pub fn set_mass(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.mu[i]).sum()
    }

    pub fn min_positive_distance(&self) -> f64 {
        match &self.metric {
            Metric::Line { coords, power } => {
                coords.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min).powf(*power)
            }
            Metric::Dense { d, .. } => d.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.metric {
            Metric::Line { coords, power } => (coords[coords.len() - 1] - coords[0]).powf(*power),
            Metric::Dense { d, .. } => d.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// Kahan-compensated prefix sums and suffix sums (`suffix[i] = sum mu[i..]`).
fn cumulative(mu: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let kahan = |it: &mut dyn Iterator<Item = f64>| {
        let mut out = vec![0.0];
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for m in it {
            let y = m - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            out.push(sum);
        }
        out
    };
    let prefix = kahan(&mut mu.iter().copied());
    let mut suffix = kahan(&mut mu.iter().rev().copied());
    suffix.reverse();
    (prefix, suffix)
}

/// First index in `[lo, hi)` where `pred` turns false, for a predicate that
/// is true on a prefix of the range.
fn partition_point(lo: usize, hi: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let m = a + (b - a) / 2;
        if pred(m) {
            a = m + 1;
        } else {
            b = m;
        }
    }
    a
}

fn dense_constants(n: usize, d: &[f64]) -> (f64, f64) {
    let per_row: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let rx = &d[x * n..(x + 1) * n];
            let mut c: f64 = 1.0;
            let mut ct: f64 = 1.0;
            for y in 0..n {
                if y == x {
                    continue;
                }
                let dxy = rx[y];
                ct = ct.max(d[y * n + x] / dxy);
                // column y accessed with stride; fine at desk scale
                let mut best = dxy;
                for z in 0..n {
                    let m = rx[z].max(d[z * n + y]);
                    if m < best {
                        best = m;
                    }
                }
                c = c.max(dxy / best);
            }
            (c, ct)
        })
        .collect();
    per_row.into_iter().fold((1.0, 1.0), |(a, b), (c, t)| (a.max(c), b.max(t)))
}

/// `sup |x-y| / max(|x-z|, |z-y|)` over sorted distinct coordinates. Only
/// triples with `z` strictly between `x` and `y` can exceed 1, where the
/// ratio is `1 + min(a, b) / max(a, b)` with gaps `a, b` on either side.
fn line_c(coords: &[f64]) -> f64 {
    let n = coords.len();
    if n < 3 {
        return 1.0;
    }
    let window = if n <= LINE_EXACT_LIMIT { n } else { LINE_WINDOW };
    let best = (1..n - 1)
        .into_par_iter()
        .map(|m| {
            let z = coords[m];
            let lo = m.saturating_sub(window);
            let hi = (m + window + 1).min(n);
            // left gaps increase as i decreases, right gaps as j increases
            let mut i = m;
            let mut j = m + 1;
            let mut best: f64 = 1.0;
            if i == lo {
                return best;
            }
            i -= 1;
            loop {
                let a = z - coords[i];
                let b = coords[j] - z;
                let r = x_ratio(a, b);
                best = best.max(r);
                if a < b {
                    if i == lo {
                        break;
                    }
                    i -= 1;
                } else {
                    j += 1;
                    if j >= hi {
                        break;
                    }
                }
            }
            best
        })
        .reduce(|| 1.0, f64::max);
    best
}

#[inline]
fn x_ratio(a: f64, b: f64) -> f64 {
    (a + b) / a.max(b)
}

/// `max(d(x, y), d(y, x))`; idempotent on symmetric spaces.
pub fn symmetrize(space: &FiniteQMMSpace) -> FiniteQMMSpace {
    match space.metric() {
        Metric::Line { .. } => space.clone(),
        Metric::Dense { n, d } => {
            let n = *n;
            let mut s = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    s[i * n + j] = d[i * n + j].max(d[j * n + i]);
                }
            }
            FiniteQMMSpace::assemble(space.labels.clone(), Metric::Dense { n, d: s }, space.mu.clone())
        }
    }
}

/// Entrywise power `d^s` of the distance; weights are unchanged.
pub fn snowflake(space: &FiniteQMMSpace, s: f64) -> Result<FiniteQMMSpace> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParams("snowflake exponent must be positive".into()));
    }
    let metric = match space.metric() {
        Metric::Line { coords, power } => Metric::Line { coords: coords.clone(), power: power * s },
        Metric::Dense { n, d } => Metric::Dense { n: *n, d: d.iter().map(|&x| if x == 0.0 { 0.0 } else { x.powf(s) }).collect() },
    };
    Ok(FiniteQMMSpace::assemble(space.labels.clone(), metric, space.mu.clone()))
}

/// Hull `E = U_k E_k` with `E_0 = B(x, r)` and
/// `E_{k+1} = U_{y in E_k} B(y, r / C_d^{k+1})`.
/// Satisfies `B(x, r) ⊆ E ⊆ B(x, C_d r)`.
pub fn open_hull(space: &FiniteQMMSpace, center: usize, r: f64) -> Vec<usize> {
    let n = space.len();
    let c = space.c_d();
    let floor = space.min_positive_distance();
    let mut inside = vec![false; n];
    for j in space.ball(center, r).members {
        inside[j] = true;
    }
    let mut radius = r;
    loop {
        radius /= c;
        // balls of radius <= the minimal distance are singletons
        if radius <= floor {
            break;
        }
        let members: Vec<usize> = (0..n).filter(|&j| inside[j]).collect();
        let mut grew = false;
        for y in members {
            for j in space.ball(y, radius).members {
                if !inside[j] {
                    inside[j] = true;
                    grew = true;
                }
            }
        }
        // radii never increase, so a step without growth is a fixpoint
        if !grew {
            break;
        }
    }
    (0..n).filter(|&j| inside[j]).collect()
}

/// `sup d(x, y)` over `x, y` in the set.
pub fn diam(space: &FiniteQMMSpace, set: &[usize]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut m: f64 = 0.0;
    for &a in set {
        for &b in set {
            m = m.max(space.dist(a, b));
        }
    }
    Ok(m)
}

/// `inf d(a, b)` over `a` in `a_set`, `b` in `b_set`.
pub fn dist_between(space: &FiniteQMMSpace, a_set: &[usize], b_set: &[usize]) -> Result<f64> {
    if a_set.is_empty() || b_set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut m = f64::INFINITY;
    for &a in a_set {
        for &b in b_set {
            m = m.min(space.dist(a, b));
        }
    }
    Ok(m)
}

/// `dist(x, E) = inf_{e in E} d(x, e)`.
pub fn dist_to_set(space: &FiniteQMMSpace, x: usize, set: &[usize]) -> f64 {
    set.iter().map(|&e| space.dist(x, e)).fold(f64::INFINITY, f64::min)
}

/// `(E)_delta = {x : dist(x, E) < delta}`.
pub fn neighborhood(space: &FiniteQMMSpace, set: &[usize], delta: f64) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok((0..space.len()).filter(|&x| dist_to_set(space, x, set) < delta).collect())
}

/// Closure of a set; on a finite space every set is closed.
pub fn closure(space: &FiniteQMMSpace, set: &[usize]) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut v: Vec<usize> = set.iter().copied().filter(|&i| i < space.len()).collect();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// Checks `(B(x, r))_delta ⊆ B(x, C_d r)`; meaningful when `C~_d delta <= r`.
pub fn neighborhood_containment(space: &FiniteQMMSpace, x: usize, r: f64, delta: f64) -> Result<bool> {
    let ball = space.ball(x, r).members;
    let nb = neighborhood(space, &ball, delta)?;
    let outer = space.ball(x, space.c_d() * r).members;
    Ok(nb.iter().all(|j| outer.binary_search(j).is_ok()))
}
