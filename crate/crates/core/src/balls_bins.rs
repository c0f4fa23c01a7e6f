//! The bipartite balls-into-bins process.
//!
//! Every `x` in `X` independently picks a uniform neighbour in `Y`; the picks
//! form the output graph and `I_k` counts the `Y` vertices that received
//! exactly `k` picks. This module samples the process, computes exact moments
//! of `I_m` and evaluates the closed-form concentration bounds.
//!
//! Exact probabilities come from Poisson-binomial dynamic programs: the load of
//! `y` is a sum of independent indicators, one per neighbour `v`, each firing
//! with probability `1/d(v)`. Joint loads of `(y1, y2)` use a bivariate program
//! in which a common neighbour feeds `y1`, `y2` or neither.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::rng::sample_stream;
use crate::Rational;

/// Largest `max d(x)` for which [`expectation_im`] and [`variance_im`] use exact rationals.
pub const EXACT_MAX_DEGREE: usize = 64;
/// Largest `|X|` for which [`expectation_im`] and [`variance_im`] use exact rationals.
pub const EXACT_MAX_X: usize = 2000;

/// One run of the process: `choice[x]` is the `Y` vertex picked by `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputAssignment {
    choice: Vec<usize>,
    in_degree: Vec<usize>,
}

impl OutputAssignment {
    /// Validates `choice` against `h`.
    pub fn new(h: &BipartiteGraph, choice: Vec<usize>) -> Result<Self> {
        if choice.len() != h.nx() {
            return Err(Error::InvalidParameters(format!(
                "assignment has {} entries for {} X vertices",
                choice.len(),
                h.nx()
            )));
        }
        let mut in_degree = vec![0; h.ny()];
        for (x, &y) in choice.iter().enumerate() {
            if y >= h.ny() || !h.has_edge(x, y) {
                return Err(Error::InvalidParameters(format!("x{x} cannot pick y{y}")));
            }
            in_degree[y] += 1;
        }
        Ok(OutputAssignment { choice, in_degree })
    }

    pub fn choice(&self) -> &[usize] {
        &self.choice
    }

    pub fn in_degree(&self) -> &[usize] {
        &self.in_degree
    }

    /// `I_k` for this run.
    pub fn count_with_load(&self, k: usize) -> usize {
        self.in_degree.iter().filter(|&&d| d == k).count()
    }
}

/// Histogram of `Y` in-degrees truncated at `kmax`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeStats {
    /// `counts[k]` = number of `Y` vertices with in-degree exactly `k`.
    pub counts: Vec<usize>,
    /// Number of `Y` vertices with in-degree above `kmax`.
    pub overflow: usize,
    /// Total in-degree carried by the overflow vertices.
    pub overflow_mass: usize,
}

impl DegreeStats {
    pub fn vertex_total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.overflow
    }

    pub fn degree_mass(&self) -> usize {
        self.counts.iter().enumerate().map(|(k, c)| k * c).sum::<usize>() + self.overflow_mass
    }
}

pub fn sample_assignment<R: Rng + ?Sized>(h: &BipartiteGraph, rng: &mut R) -> Result<OutputAssignment> {
    let mut choice = Vec::with_capacity(h.nx());
    let mut in_degree = vec![0; h.ny()];
    for x in 0..h.nx() {
        let deg = h.x_degree(x);
        if deg == 0 {
            return Err(Error::IsolatedVertex(x));
        }
        let y = h.x_neighbor(x, rng.random_range(0..deg));
        in_degree[y] += 1;
        choice.push(y);
    }
    Ok(OutputAssignment { choice, in_degree })
}

pub fn degree_stats(a: &OutputAssignment, kmax: usize) -> DegreeStats {
    let mut counts = vec![0; kmax + 1];
    let (mut overflow, mut overflow_mass) = (0, 0);
    for &d in &a.in_degree {
        if d <= kmax {
            counts[d] += 1;
        } else {
            overflow += 1;
            overflow_mass += d;
        }
    }
    DegreeStats { counts, overflow, overflow_mass }
}

fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Coefficients `0..=m` of `prod_j (1 - p_j + p_j t)`.
fn poisson_binomial(probs: impl Iterator<Item = Rational>, m: usize) -> Vec<Rational> {
    let mut dist = vec![Rational::zero(); m + 1];
    dist[0] = Rational::one();
    for p in probs {
        let q = Rational::one() - &p;
        for j in (0..=m).rev() {
            let stay = &dist[j] * &q;
            dist[j] = if j > 0 { stay + &dist[j - 1] * &p } else { stay };
        }
    }
    dist
}

fn poisson_binomial_f64(probs: impl Iterator<Item = f64>, m: usize) -> Vec<f64> {
    let mut dist = vec![0.0; m + 1];
    dist[0] = 1.0;
    for p in probs {
        for j in (0..=m).rev() {
            dist[j] = dist[j] * (1.0 - p) + if j > 0 { dist[j - 1] * p } else { 0.0 };
        }
    }
    dist
}

fn check_y(h: &BipartiteGraph, y: usize) -> Result<()> {
    if y >= h.ny() {
        return Err(Error::VertexOutOfRange { vertex: y, n: h.ny() });
    }
    Ok(())
}

/// Exact probability that `y` receives exactly `m` picks (zero when `m > d(y)`).
pub fn exact_degree_prob(h: &BipartiteGraph, y: usize, m: usize) -> Result<Rational> {
    check_y(h, y)?;
    if m > h.y_degree(y) {
        return Ok(Rational::zero());
    }
    let probs = h.y_neighbors(y).map(|v| ratio(1, h.x_degree(v)));
    Ok(poisson_binomial(probs, m).swap_remove(m))
}

/// Floating-point counterpart of [`exact_degree_prob`].
pub fn degree_prob_f64(h: &BipartiteGraph, y: usize, m: usize) -> Result<f64> {
    check_y(h, y)?;
    if m > h.y_degree(y) {
        return Ok(0.0);
    }
    let probs = h.y_neighbors(y).map(|v| 1.0 / h.x_degree(v) as f64);
    Ok(poisson_binomial_f64(probs, m)[m])
}

/// `E[I_m] = sum_y P[load(y) = m]`, exactly.
pub fn exact_expectation_im(h: &BipartiteGraph, m: usize) -> Rational {
    (0..h.ny())
        .map(|y| exact_degree_prob(h, y, m).expect("y in range"))
        .fold(Rational::zero(), |acc, p| acc + p)
}

pub fn expectation_im_f64(h: &BipartiteGraph, m: usize) -> f64 {
    (0..h.ny()).map(|y| degree_prob_f64(h, y, m).expect("y in range")).sum()
}

/// Splits `N(y1) ∪ N(y2)` into the private parts and the common part `Z`.
fn neighbourhood_split(h: &BipartiteGraph, y1: usize, y2: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let a: Vec<usize> = h.y_neighbors(y1).collect();
    let b: Vec<usize> = h.y_neighbors(y2).collect();
    let (mut only1, mut only2, mut common) = (Vec::new(), Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) if u == v => {
                common.push(u);
                i += 1;
                j += 1;
            }
            (Some(&u), Some(&v)) if u < v => {
                only1.push(u);
                i += 1;
            }
            (Some(_), Some(&v)) => {
                only2.push(v);
                j += 1;
            }
            (Some(&u), None) => {
                only1.push(u);
                i += 1;
            }
            (None, Some(&v)) => {
                only2.push(v);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    (only1, only2, common)
}

/// Exact probability that both `y1` and `y2` receive exactly `m` picks.
pub fn exact_pair_prob(h: &BipartiteGraph, y1: usize, y2: usize, m: usize) -> Result<Rational> {
    check_y(h, y1)?;
    check_y(h, y2)?;
    if y1 == y2 {
        return Err(Error::InvalidParameters("pair probability needs y1 != y2".into()));
    }
    let (only1, only2, common) = neighbourhood_split(h, y1, y2);
    let w = m + 1;
    let mut dist = vec![Rational::zero(); w * w];
    dist[0] = Rational::one();
    let mut step = |p1: Rational, p2: Rational| {
        let stay = Rational::one() - &p1 - &p2;
        for a in (0..=m).rev() {
            for b in (0..=m).rev() {
                let mut v = &dist[a * w + b] * &stay;
                if a > 0 && !p1.is_zero() {
                    v += &dist[(a - 1) * w + b] * &p1;
                }
                if b > 0 && !p2.is_zero() {
                    v += &dist[a * w + b - 1] * &p2;
                }
                dist[a * w + b] = v;
            }
        }
    };
    for v in only1 {
        step(ratio(1, h.x_degree(v)), Rational::zero());
    }
    for v in only2 {
        step(Rational::zero(), ratio(1, h.x_degree(v)));
    }
    for v in common {
        let p = ratio(1, h.x_degree(v));
        step(p.clone(), p);
    }
    Ok(dist.swap_remove(m * w + m))
}

fn pair_prob_f64(h: &BipartiteGraph, y1: usize, y2: usize, m: usize) -> f64 {
    let (only1, only2, common) = neighbourhood_split(h, y1, y2);
    let w = m + 1;
    let mut dist = vec![0.0; w * w];
    dist[0] = 1.0;
    let mut step = |p1: f64, p2: f64| {
        for a in (0..=m).rev() {
            for b in (0..=m).rev() {
                let mut v = dist[a * w + b] * (1.0 - p1 - p2);
                if a > 0 {
                    v += dist[(a - 1) * w + b] * p1;
                }
                if b > 0 {
                    v += dist[a * w + b - 1] * p2;
                }
                dist[a * w + b] = v;
            }
        }
    };
    for v in only1 {
        step(1.0 / h.x_degree(v) as f64, 0.0);
    }
    for v in only2 {
        step(0.0, 1.0 / h.x_degree(v) as f64);
    }
    for v in common {
        let p = 1.0 / h.x_degree(v) as f64;
        step(p, p);
    }
    dist[m * w + m]
}

/// Ordered pairs `(y1, y2)`, `y1 != y2`, whose neighbourhoods intersect.
fn overlapping_pairs(h: &BipartiteGraph) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let mut mark = vec![usize::MAX; h.ny()];
    for y1 in 0..h.ny() {
        for x in h.y_neighbors(y1) {
            for y2 in h.x_neighbors(x) {
                if y2 != y1 && mark[y2] != y1 {
                    mark[y2] = y1;
                    pairs.push((y1, y2));
                }
            }
        }
    }
    pairs
}

/// `Var[I_m]`, exactly.
///
/// Pairs with disjoint neighbourhoods have independent loads, so
/// `Var[I_m] = sum_y p_y(1 - p_y) + sum_{overlapping (y1,y2)} (p_{y1,y2} - p_{y1} p_{y2})`.
pub fn exact_variance_im(h: &BipartiteGraph, m: usize) -> Rational {
    let p: Vec<Rational> = (0..h.ny())
        .map(|y| exact_degree_prob(h, y, m).expect("y in range"))
        .collect();
    let mut var = p
        .iter()
        .fold(Rational::zero(), |acc, py| acc + py * (Rational::one() - py));
    for (y1, y2) in overlapping_pairs(h) {
        let joint = exact_pair_prob(h, y1, y2, m).expect("distinct vertices in range");
        var += joint - &p[y1] * &p[y2];
    }
    var
}

pub fn variance_im_f64(h: &BipartiteGraph, m: usize) -> f64 {
    let p: Vec<f64> = (0..h.ny())
        .map(|y| degree_prob_f64(h, y, m).expect("y in range"))
        .collect();
    let diag: f64 = p.iter().map(|q| q * (1.0 - q)).sum();
    let off: f64 = overlapping_pairs(h)
        .into_iter()
        .map(|(y1, y2)| pair_prob_f64(h, y1, y2, m) - p[y1] * p[y2])
        .sum();
    diag + off
}

/// A moment that is exact when the graph is small enough.
#[derive(Clone, Debug, PartialEq)]
pub enum Moment {
    Exact(Rational),
    Approx(f64),
}

impl Moment {
    pub fn to_f64(&self) -> f64 {
        match self {
            Moment::Exact(r) => rational_to_f64(r),
            Moment::Approx(v) => *v,
        }
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn use_exact(h: &BipartiteGraph) -> bool {
    h.max_x_degree() <= EXACT_MAX_DEGREE && h.nx() <= EXACT_MAX_X
}

/// `E[I_m]`: exact rationals on small graphs, double precision otherwise.
pub fn expectation_im(h: &BipartiteGraph, m: usize) -> Moment {
    if use_exact(h) {
        Moment::Exact(exact_expectation_im(h, m))
    } else {
        Moment::Approx(expectation_im_f64(h, m))
    }
}

/// `Var[I_m]`: exact rationals on small graphs, double precision otherwise.
pub fn variance_im(h: &BipartiteGraph, m: usize) -> Moment {
    if use_exact(h) {
        Moment::Exact(exact_variance_im(h, m))
    } else {
        Moment::Approx(variance_im_f64(h, m))
    }
}

/// Poisson(1) mass at `k`: `e^{-1}/k!`.
pub fn poisson_one(k: usize) -> f64 {
    let mut v = (-1.0f64).exp();
    for i in 2..=k {
        v /= i as f64;
    }
    v
}

/// Parameters of the concentration bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundParams {
    pub k: usize,
    pub m: usize,
    pub delta: f64,
    pub gamma: f64,
    pub n: u64,
}

/// Closed interval `center ± half_width`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Band {
    pub center: f64,
    pub half_width: f64,
}

impl Band {
    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo() && v <= self.hi()
    }
}

impl BoundParams {
    /// Upper end of the admissible slack interval, `1e-8 / ((k+2)!)^2`.
    pub fn max_delta(k: usize) -> f64 {
        let fact: f64 = (1..=k + 2).map(|i| i as f64).product();
        1e-8 / (fact * fact)
    }

    pub fn delta_admissible(&self) -> bool {
        self.delta >= 0.0 && self.delta <= Self::max_delta(self.k)
    }

    /// The bands degenerate to points at `delta = 0`; they only hold
    /// asymptotically in the degree.
    pub fn asymptotic_only(&self) -> bool {
        self.delta == 0.0
    }

    /// Smallest `gamma` the tail bound accepts, `600(k+1)sqrt(delta)`.
    pub fn gamma_threshold(&self) -> f64 {
        600.0 * (self.k + 1) as f64 * self.delta.sqrt()
    }

    fn check_band(&self) -> Result<()> {
        if self.m > self.k {
            return Err(Error::BoundDomain(format!("m={} exceeds k={}", self.m, self.k)));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::BoundDomain(format!("delta={} must be >= 0", self.delta)));
        }
        Ok(())
    }
}

/// Tail bound on `P[|I_k - e^{-1}n/k!| > gamma n]`:
/// `10 exp(-(gamma - 600(k+1)sqrt(delta))^2 n / (32(k+1)))`. May exceed 1.
pub fn tail_bound_thm21(p: &BoundParams) -> Result<f64> {
    if !p.delta_admissible() {
        return Err(Error::BoundDomain(format!(
            "delta={} outside [0, {:e}] for k={}",
            p.delta,
            BoundParams::max_delta(p.k),
            p.k
        )));
    }
    let excess = p.gamma - p.gamma_threshold();
    if excess < 0.0 {
        return Err(Error::BoundDomain(format!(
            "gamma={} below the threshold {}",
            p.gamma,
            p.gamma_threshold()
        )));
    }
    let k1 = (p.k + 1) as f64;
    Ok(10.0 * (-(excess * excess) / (32.0 * k1) * p.n as f64).exp())
}

/// Band for `E[I_m]`: `e^{-1}n/m! ± 100(k+1) delta e^{-1}n/m!`.
pub fn expectation_band_lemma23(p: &BoundParams) -> Result<Band> {
    p.check_band()?;
    let center = poisson_one(p.m) * p.n as f64;
    Ok(Band { center, half_width: 100.0 * (p.k + 1) as f64 * p.delta * center })
}

/// Bound on the standard deviation of `I_m`: `100 sqrt((k+1) delta) e^{-1}n/m!`.
pub fn variance_bound_lemma24(p: &BoundParams) -> Result<f64> {
    p.check_band()?;
    Ok(100.0 * ((p.k + 1) as f64 * p.delta).sqrt() * poisson_one(p.m) * p.n as f64)
}

/// Band holding `I_{>m}` with probability at least 1/2:
/// `sum_{i>m} e^{-1}n/i! ± 300(k+1) sqrt(delta) n`.
pub fn median_band_lemma25(p: &BoundParams) -> Result<Band> {
    p.check_band()?;
    let head: f64 = (0..=p.m).map(poisson_one).sum();
    let n = p.n as f64;
    Ok(Band {
        center: (1.0 - head) * n,
        half_width: 300.0 * (p.k + 1) as f64 * p.delta.sqrt() * n,
    })
}

/// Empirical frequency of `|I_k - e^{-1}n/k!| > gamma n` with `n = |Y|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub samples: u64,
    pub hits: u64,
    pub frequency: f64,
    pub std_err: f64,
}

/// Monte Carlo estimate of the tail event. Sample `i` uses stream `i` of `seed`.
pub fn mc_tail_estimate(
    h: &BipartiteGraph,
    k: usize,
    gamma: f64,
    samples: u64,
    seed: u64,
) -> Result<TailEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameters("need at least one sample".into()));
    }
    if let Some(x) = (0..h.nx()).find(|&x| h.x_degree(x) == 0) {
        return Err(Error::IsolatedVertex(x));
    }
    let n = h.ny() as f64;
    let target = poisson_one(k) * n;
    let hits: u64 = (0..samples)
        .into_par_iter()
        .map(|i| {
            let a = sample_assignment(h, &mut sample_stream(seed, i)).expect("no isolated X vertex");
            u64::from((a.count_with_load(k) as f64 - target).abs() > gamma * n)
        })
        .sum();
    let frequency = hits as f64 / samples as f64;
    Ok(TailEstimate {
        samples,
        hits,
        frequency,
        std_err: (frequency * (1.0 - frequency) / samples as f64).sqrt(),
    })
}

/// `I_k` for each sample `0..samples` and each `k` in `ks`, in sample order.
pub fn sample_counts(h: &BipartiteGraph, ks: &[usize], samples: u64, seed: u64) -> Result<Vec<Vec<usize>>> {
    if let Some(x) = (0..h.nx()).find(|&x| h.x_degree(x) == 0) {
        return Err(Error::IsolatedVertex(x));
    }
    Ok((0..samples)
        .into_par_iter()
        .map(|i| {
            let a = sample_assignment(h, &mut sample_stream(seed, i)).expect("no isolated X vertex");
            let kmax = ks.iter().copied().max().unwrap_or(0);
            let stats = degree_stats(&a, kmax);
            ks.iter().map(|&k| stats.counts[k]).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Family, Generated, GraphSpec};
    use crate::rng::sample_stream;
    use proptest::prelude::*;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(BigInt::from(a), BigInt::from(b))
    }

    fn k22() -> BipartiteGraph {
        BipartiteGraph::complete(2, 2)
    }

    /// Every assignment of `h` with its probability; the enumeration oracle.
    fn all_assignments(h: &BipartiteGraph) -> Vec<(Vec<usize>, Rational)> {
        let mut out = vec![(Vec::new(), Rational::one())];
        for x in 0..h.nx() {
            let d = h.x_degree(x);
            out = out
                .into_iter()
                .flat_map(|(pre, p)| {
                    h.x_neighbors(x).map(move |y| {
                        let mut next = pre.clone();
                        next.push(y);
                        (next, &p * r(1, d as i64))
                    })
                })
                .collect();
        }
        out
    }

    fn brute_moments(h: &BipartiteGraph, m: usize) -> (Rational, Rational) {
        let mut e1 = Rational::zero();
        let mut e2 = Rational::zero();
        for (choice, p) in all_assignments(h) {
            let a = OutputAssignment::new(h, choice).unwrap();
            let c = BigInt::from(a.count_with_load(m));
            e1 += &p * Rational::from_integer(c.clone());
            e2 += &p * Rational::from_integer(&c * &c);
        }
        let var = &e2 - &e1 * &e1;
        (e1, var)
    }

    #[test]
    fn single_edge_always_hits() {
        let h = BipartiteGraph::complete(1, 1);
        for i in 0..10 {
            let a = sample_assignment(&h, &mut sample_stream(3, i)).unwrap();
            assert_eq!(a.choice(), &[0]);
        }
    }

    #[test]
    fn k22_assignments_are_uniform() {
        let h = k22();
        let samples = 40_000u64;
        let mut counts = [0u64; 4];
        let mut rng = sample_stream(11, 0);
        for _ in 0..samples {
            let a = sample_assignment(&h, &mut rng).unwrap();
            counts[a.choice()[0] * 2 + a.choice()[1]] += 1;
        }
        let expected = samples as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 3 degrees of freedom, 99.9% critical value
        assert!(chi2 < 16.27, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn isolated_x_is_rejected() {
        let h = BipartiteGraph::from_edges(2, 1, [(0, 0)]).unwrap();
        assert!(matches!(sample_assignment(&h, &mut sample_stream(0, 0)), Err(Error::IsolatedVertex(1))));
    }

    #[test]
    fn degree_stats_examples() {
        let h = k22();
        let a = OutputAssignment::new(&h, vec![0, 0]).unwrap();
        let s = degree_stats(&a, 1);
        assert_eq!(s.counts, vec![1, 0]);
        assert_eq!(s.overflow, 1);
        assert_eq!(s.degree_mass(), 2);

        let h = BipartiteGraph::complete(3, 5);
        let a = OutputAssignment::new(&h, vec![4, 1, 2]).unwrap();
        assert_eq!(degree_stats(&a, 3).counts[1], 3);
    }

    #[test]
    fn degree_prob_examples() {
        // 2-regular: binomial(2, 1/2)
        let c = BipartiteGraph::from_edges(3, 3, [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0)]).unwrap();
        assert_eq!(exact_degree_prob(&c, 0, 0).unwrap(), r(1, 4));
        assert_eq!(exact_degree_prob(&c, 0, 1).unwrap(), r(1, 2));
        assert_eq!(exact_degree_prob(&c, 0, 2).unwrap(), r(1, 4));
        assert_eq!(exact_degree_prob(&c, 0, 3).unwrap(), r(0, 1));

        // y0's neighbours have degrees 2 and 3
        let h = BipartiteGraph::from_edges(2, 3, [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2)]).unwrap();
        assert_eq!(exact_degree_prob(&h, 0, 0).unwrap(), r(1, 3));
        assert_eq!(exact_degree_prob(&h, 0, 1).unwrap(), r(1, 2));
        assert_eq!(exact_degree_prob(&h, 0, 2).unwrap(), r(1, 6));

        assert_eq!(exact_degree_prob(&BipartiteGraph::complete(3, 3), 1, 0).unwrap(), r(8, 27));
        assert!(exact_degree_prob(&h, 3, 0).is_err());
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(exact_expectation_im(&k22(), 1), r(1, 1));
        assert_eq!(exact_expectation_im(&BipartiteGraph::complete(3, 3), 0), r(8, 9));
        let (e1, _) = brute_moments(&k22(), 1);
        assert_eq!(e1, r(1, 1));

        // random 4-regular bipartite: n (1 - 1/d)^d
        let h = match crate::graph::generate(&GraphSpec::new(
            Family::RandomBipartiteRegular { n: 12, d: 4, delta: 0.0 },
            5,
        ))
        .unwrap()
        {
            Generated::Bipartite(h) => h,
            Generated::Graph(_) => unreachable!(),
        };
        assert_eq!(exact_expectation_im(&h, 0), r(12 * 81, 256));
    }

    #[test]
    fn pair_prob_examples() {
        assert_eq!(exact_pair_prob(&k22(), 0, 1, 0).unwrap(), r(0, 1));
        assert_eq!(exact_pair_prob(&k22(), 0, 1, 1).unwrap(), r(1, 2));
        assert!(exact_pair_prob(&k22(), 1, 1, 1).is_err());

        let h = BipartiteGraph::from_edges(3, 2, [(0, 0), (1, 0), (2, 1)]).unwrap();
        for m in 0..3 {
            let joint = exact_pair_prob(&h, 0, 1, m).unwrap();
            let product = exact_degree_prob(&h, 0, m).unwrap() * exact_degree_prob(&h, 1, m).unwrap();
            assert_eq!(joint, product);
        }
    }

    #[test]
    fn variance_examples() {
        assert_eq!(exact_variance_im(&k22(), 1), r(1, 1));
        assert_eq!(brute_moments(&k22(), 1).1, r(1, 1));

        let matching = BipartiteGraph::from_edges(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        assert_eq!(exact_variance_im(&matching, 1), r(0, 1));

        // disjoint stars: independent indicators
        let h = BipartiteGraph::from_edges(4, 2, [(0, 0), (0, 1), (1, 0), (2, 1), (3, 1)]).unwrap();
        let independent = BipartiteGraph::from_edges(3, 2, [(0, 0), (1, 1), (2, 1)]).unwrap();
        let want = (0..2).fold(Rational::zero(), |acc, y| {
            let p = exact_degree_prob(&independent, y, 1).unwrap();
            acc + &p * (Rational::one() - &p)
        });
        assert_eq!(exact_variance_im(&independent, 1), want);
        assert_eq!(exact_variance_im(&h, 2), brute_moments(&h, 2).1);
    }

    #[test]
    fn float_paths_track_exact_paths() {
        let h = BipartiteGraph::from_edges(4, 3, [(0, 0), (0, 1), (1, 1), (1, 2), (2, 0), (2, 2), (3, 2)]).unwrap();
        for m in 0..4 {
            let e = rational_to_f64(&exact_expectation_im(&h, m));
            let v = rational_to_f64(&exact_variance_im(&h, m));
            assert!((expectation_im_f64(&h, m) - e).abs() < 1e-12);
            assert!((variance_im_f64(&h, m) - v).abs() < 1e-12);
        }
        assert!(matches!(expectation_im(&h, 0), Moment::Exact(_)));
        assert!(matches!(expectation_im(&BipartiteGraph::complete(2001, 3), 0), Moment::Approx(_)));
    }

    #[test]
    fn tail_bound_values() {
        let p = |k, gamma, n| BoundParams { k, m: 0, delta: 0.0, gamma, n };
        assert!((tail_bound_thm21(&p(0, 0.2, 5000)).unwrap() - 0.019_304_541_362_277_09).abs() < 1e-12);
        assert!((tail_bound_thm21(&p(1, 0.3, 3200)).unwrap() - 0.111_089_965_382_423_06).abs() < 1e-12);
        assert_eq!(tail_bound_thm21(&p(0, 0.0, 123)).unwrap(), 10.0);

        let low_gamma = BoundParams { k: 0, m: 0, delta: 1e-10, gamma: 0.001, n: 10 };
        assert!(matches!(tail_bound_thm21(&low_gamma), Err(Error::BoundDomain(_))));
        let big_delta = BoundParams { k: 2, m: 0, delta: 1e-9, gamma: 1.0, n: 10 };
        assert!(matches!(tail_bound_thm21(&big_delta), Err(Error::BoundDomain(_))));
    }

    #[test]
    fn band_values() {
        let p = BoundParams { k: 0, m: 0, delta: 1e-10, gamma: 0.0, n: 1_000_000 };
        let b = expectation_band_lemma23(&p).unwrap();
        assert!((b.center - 367_879.441_171_442_3).abs() < 1e-6);
        assert!((b.half_width - 0.003_678_794_411_714_423).abs() < 1e-12);
        assert!((variance_bound_lemma24(&p).unwrap() - 367.879_441_171_442_35).abs() < 1e-9);
        assert!((median_band_lemma25(&p).unwrap().half_width - 3000.0).abs() < 1e-9);

        let zero = BoundParams { k: 1, m: 1, delta: 0.0, gamma: 0.0, n: 500 };
        assert!(zero.asymptotic_only());
        assert_eq!(expectation_band_lemma23(&zero).unwrap().half_width, 0.0);
        assert_eq!(variance_bound_lemma24(&zero).unwrap(), 0.0);

        let p = BoundParams { k: 2, m: 2, delta: 1e-9, gamma: 0.0, n: 1_000_000 };
        let b = expectation_band_lemma23(&p).unwrap();
        assert!((b.center - 183_939.720_585_721_17).abs() < 1e-6);
        assert!((b.half_width - 0.055_181_916_175_716_36).abs() < 1e-12);
        assert!(!p.delta_admissible());

        let p = BoundParams { k: 3, m: 1, delta: 1e-12, gamma: 0.0, n: 1_000_000 };
        assert!((variance_bound_lemma24(&p).unwrap() - 73.575_888_234_288_46).abs() < 1e-9);

        let p = BoundParams { k: 0, m: 0, delta: 0.0, gamma: 0.0, n: 1000 };
        let b = median_band_lemma25(&p).unwrap();
        assert!((b.center - 632.120_558_828_557_7).abs() < 1e-9);
        assert_eq!(b.half_width, 0.0);
        let p = BoundParams { k: 1, m: 1, delta: 1e-10, gamma: 0.0, n: 1_000_000 };
        assert!((median_band_lemma25(&p).unwrap().center - 264_241.117_657_115_3).abs() < 1e-6);

        let bad = BoundParams { k: 1, m: 2, delta: 0.0, gamma: 0.0, n: 1 };
        assert!(expectation_band_lemma23(&bad).is_err());
    }

    #[test]
    fn mc_tail_edge_cases() {
        let h = BipartiteGraph::complete(50, 50);
        assert_eq!(mc_tail_estimate(&h, 0, 1.0, 200, 1).unwrap().hits, 0);
        // e^{-1} n is irrational, so the deviation is always positive
        assert_eq!(mc_tail_estimate(&h, 0, 0.0, 200, 1).unwrap().frequency, 1.0);
        assert!(mc_tail_estimate(&h, 0, 0.0, 0, 1).is_err());
    }

    #[test]
    fn mc_tail_on_large_complete_graph() {
        let h = BipartiteGraph::complete(2000, 2000);
        let est = mc_tail_estimate(&h, 0, 0.2, 10_000, 2).unwrap();
        assert_eq!(est.hits, 0);
    }

    #[test]
    fn monte_carlo_mean_matches_exact_expectation() {
        let h = BipartiteGraph::from_edges(
            5,
            4,
            [(0, 0), (0, 1), (1, 1), (1, 2), (1, 3), (2, 0), (2, 3), (3, 2), (4, 0), (4, 1), (4, 2), (4, 3)],
        )
        .unwrap();
        let samples = 20_000u64;
        for m in 0..3 {
            let counts = sample_counts(&h, &[m], samples, 17).unwrap();
            let xs: Vec<f64> = counts.iter().map(|c| c[0] as f64).collect();
            let mean = xs.iter().sum::<f64>() / samples as f64;
            let var = rational_to_f64(&exact_variance_im(&h, m));
            let se = (var / samples as f64).sqrt();
            let exact = rational_to_f64(&exact_expectation_im(&h, m));
            assert!((mean - exact).abs() <= 4.0 * se, "m={m}: mean {mean}, exact {exact}, se {se}");
        }
    }

    fn small_bipartite() -> impl Strategy<Value = BipartiteGraph> {
        (1usize..4, 1usize..4, any::<u16>()).prop_filter_map("isolated x", |(nx, ny, mask)| {
            let edges: Vec<(usize, usize)> = (0..nx)
                .flat_map(|x| (0..ny).map(move |y| (x, y)))
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, e)| e)
                .collect();
            let h = BipartiteGraph::from_edges(nx, ny, edges).ok()?;
            (0..nx).all(|x| h.x_degree(x) > 0).then_some(h)
        })
    }

    proptest! {
        #[test]
        fn degree_probabilities_sum_to_one(h in small_bipartite()) {
            for y in 0..h.ny() {
                let total = (0..=h.y_degree(y))
                    .map(|m| exact_degree_prob(&h, y, m).unwrap())
                    .fold(Rational::zero(), |a, b| a + b);
                prop_assert_eq!(total, Rational::one());
            }
        }

        #[test]
        fn exact_moments_match_enumeration(h in small_bipartite(), m in 0usize..4) {
            let (e, v) = brute_moments(&h, m);
            prop_assert_eq!(exact_expectation_im(&h, m), e);
            prop_assert_eq!(exact_variance_im(&h, m), v);
        }

        #[test]
        fn degree_stats_conserve_mass(h in small_bipartite(), seed in any::<u64>(), kmax in 0usize..3) {
            let a = sample_assignment(&h, &mut sample_stream(seed, 0)).unwrap();
            let s = degree_stats(&a, kmax);
            prop_assert_eq!(s.vertex_total(), h.ny());
            prop_assert_eq!(s.degree_mass(), h.nx());
        }
    }
}
