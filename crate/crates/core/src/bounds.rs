//! Counting bounds for labeled tree copies: Brégman–Minc, an exact permanent,
//! embedding counts, and the leaf-case bound on `N(T; G)`.
//!
//! Everything is in natural-log space. The digraph argument behind the bound
//! (each edge of `G` replaced by a digon, trees oriented away from a root) is
//! never built; only its counting consequences appear as report components.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::balls_bins::BoundParams;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Graph};
use crate::spanning::{count_spanning_trees, Tree};
use crate::tree_iso::{aut_size, leaf_count};
use crate::{BigCount, Rational};

pub const PERMANENT_MAX_N: usize = 20;
pub const EMBEDDING_MAX_N: usize = 12;

/// Slack of the almost-regular host graphs the bound is stated for.
pub const THM_DELTA: f64 = 1e-10;

pub fn ln_factorial(d: u64) -> f64 {
    if d < 64 {
        (2..=d).map(|i| (i as f64).ln()).sum()
    } else {
        ln_gamma(d as f64 + 1.0)
    }
}

/// `sum_{v in A} ln(d(v)!) / d(v)` with `A` the X side. Returns `-inf` when
/// some vertex of `A` is isolated (no perfect matchings).
pub fn bregman_minc_bound(h: &BipartiteGraph) -> Result<f64> {
    if h.nx() != h.ny() {
        return Err(Error::InvalidParameters(format!(
            "parts differ in size: {} vs {}",
            h.nx(),
            h.ny()
        )));
    }
    let mut total = 0.0;
    for d in h.x_degrees() {
        if d == 0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += ln_factorial(d as u64) / d as f64;
    }
    Ok(total)
}

/// Number of perfect matchings by Ryser's formula, columns visited in Gray
/// code order.
pub fn permanent_ryser(h: &BipartiteGraph) -> Result<BigCount> {
    let n = h.nx();
    if n != h.ny() {
        return Err(Error::InvalidParameters(format!("parts differ in size: {n} vs {}", h.ny())));
    }
    if n > PERMANENT_MAX_N {
        return Err(Error::CapExceeded { what: "permanent size".into(), cap: PERMANENT_MAX_N as u64 });
    }
    if n == 0 {
        return Ok(BigUint::from(1u8));
    }
    let a: Vec<Vec<i64>> = (0..n)
        .map(|x| (0..n).map(|y| i64::from(h.has_edge(x, y))).collect())
        .collect();
    let mut row_sums = vec![0i64; n];
    let mut total: i128 = 0;
    let mut gray = 0u32;
    for i in 1u32..(1 << n) {
        let next = i ^ (i >> 1);
        let col = (gray ^ next).trailing_zeros() as usize;
        let sign = if next & (1 << col) != 0 { 1 } else { -1 };
        for (r, s) in row_sums.iter_mut().enumerate() {
            *s += sign * a[r][col];
        }
        gray = next;
        let prod: i128 = row_sums.iter().map(|&s| s as i128).product();
        if (n as u32 - gray.count_ones()) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    debug_assert!(total >= 0);
    Ok(BigUint::from(total as u128))
}

/// Number of injective maps `V(t) -> V(g)` sending edges to edges.
pub fn count_labeled_copies(t: &Tree, g: &Graph) -> Result<BigCount> {
    let n = t.n();
    if n > g.n() {
        return Ok(BigUint::zero());
    }
    if n > EMBEDDING_MAX_N || g.n() > EMBEDDING_MAX_N {
        return Err(Error::CapExceeded { what: "embedding search size".into(), cap: EMBEDDING_MAX_N as u64 });
    }
    if (0..n).any(|v| t.degree(v) > g.max_degree()) {
        return Ok(BigUint::zero());
    }
    // BFS from a vertex of maximum degree so that every later vertex has its
    // parent already placed
    let root = (0..n).max_by_key(|&v| t.degree(v)).expect("trees are non-empty");
    let mut order = vec![root];
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        for &w in t.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                parent[w] = u;
                order.push(w);
            }
        }
        i += 1;
    }
    let slot_parent: Vec<usize> = order
        .iter()
        .map(|&v| order.iter().position(|&p| p == parent[v]).unwrap_or(usize::MAX))
        .collect();
    let need: Vec<usize> = order.iter().map(|&v| t.degree(v)).collect();

    struct Search<'a> {
        g: &'a Graph,
        slot_parent: Vec<usize>,
        need: Vec<usize>,
        image: Vec<usize>,
        used: Vec<bool>,
    }

    impl Search<'_> {
        fn fits(&self, slot: usize, v: usize) -> bool {
            !self.used[v] && self.g.degree(v) >= self.need[slot]
        }

        fn go(&mut self, slot: usize) -> u64 {
            let host = self.image[self.slot_parent[slot]];
            let last = slot + 1 == self.need.len();
            let mut total = 0;
            for idx in 0..self.g.neighbors(host).len() {
                let v = self.g.neighbors(host)[idx];
                if !self.fits(slot, v) {
                    continue;
                }
                if last {
                    total += 1;
                    continue;
                }
                self.used[v] = true;
                self.image[slot] = v;
                total += self.go(slot + 1);
                self.used[v] = false;
            }
            total
        }
    }

    let mut search = Search { g, slot_parent, need, image: vec![0; n], used: vec![false; g.n()] };
    let mut total = 0u64;
    for v in 0..g.n() {
        if !search.fits(0, v) {
            continue;
        }
        if n == 1 {
            total += 1;
            continue;
        }
        search.used[v] = true;
        search.image[0] = v;
        total += search.go(1);
        search.used[v] = false;
    }
    Ok(BigUint::from(total))
}

/// Probability that a uniform spanning tree of `g` is isomorphic to `t`.
pub fn iso_class_probability(t: &Tree, g: &Graph) -> Result<Rational> {
    if t.n() != g.n() {
        return Err(Error::InvalidParameters(format!(
            "tree has {} vertices, graph has {}",
            t.n(),
            g.n()
        )));
    }
    let trees = count_spanning_trees(g);
    if trees.is_zero() {
        return Err(Error::Disconnected);
    }
    let copies = count_labeled_copies(t, g)?;
    let classes = copies / aut_size(t);
    Ok(BigRational::new(classes.into(), trees.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundCase {
    FewLeaves,
    ManyLeaves,
    Trivial,
}

impl BoundCase {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundCase::FewLeaves => "few-leaves",
            BoundCase::ManyLeaves => "many-leaves",
            BoundCase::Trivial => "trivial",
        }
    }
}

/// Log-terms of the bound; inactive terms are zero, so they sum to the bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BoundComponents {
    pub tail: f64,
    pub embedding: f64,
    pub matching: f64,
    pub trivial: f64,
}

impl BoundComponents {
    pub fn sum(&self) -> f64 {
        self.tail + self.embedding + self.matching + self.trivial
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: u64,
    pub d: f64,
    pub delta: f64,
    pub leaves: u64,
    pub case: BoundCase,
    pub log_bound: f64,
    pub components: BoundComponents,
    /// `-n/1000 + n ln d`, the clean asymptotic form, shown for comparison.
    pub headline_log: f64,
}

/// Tail parameter used when a tree has few leaves.
pub fn few_leaves_gamma() -> f64 {
    (-1f64).exp() - 0.1
}

/// Below this size a tree cannot have fewer than `n/10` leaves, so the case
/// split is empty and only the trivial bound is reported.
pub const MIN_CASE_N: u64 = 20;

/// Log-bound on the number of labeled copies of an `n`-vertex tree with
/// `leaves` leaves in a `(d, delta)`-almost-regular graph.
pub fn thm31_bound(n: u64, leaves: u64, d: f64, delta: f64) -> Result<BoundReport> {
    if n < 2 {
        return Err(Error::BoundDomain(format!("n={n} must be at least 2")));
    }
    if leaves > n - 1 {
        return Err(Error::BoundDomain(format!("leaf count {leaves} exceeds n-1={}", n - 1)));
    }
    if !(d.is_finite() && d >= 1.0) {
        return Err(Error::BoundDomain(format!("d={d} must be >= 1")));
    }
    let params = BoundParams { k: 0, m: 0, delta, gamma: few_leaves_gamma(), n };
    if !params.delta_admissible() {
        return Err(Error::BoundDomain(format!(
            "delta={delta} outside [0, {:e}]",
            BoundParams::max_delta(0)
        )));
    }

    let nf = n as f64;
    let lf = leaves as f64;
    let ln_d1 = ((1.0 + delta) * d).ln();
    let trivial = nf * ln_d1;
    let headline_log = -nf / 1000.0 + nf * d.ln();

    let trivial_report = |components| BoundReport {
        n,
        d,
        delta,
        leaves,
        case: BoundCase::Trivial,
        log_bound: trivial,
        components,
        headline_log,
    };
    let only_trivial = BoundComponents { trivial, ..Default::default() };
    if n < MIN_CASE_N {
        return Ok(trivial_report(only_trivial));
    }

    let (case, components) = if lf < nf / 10.0 {
        let excess = params.gamma - params.gamma_threshold();
        let ln_tail = (10f64.ln() - excess * excess / 32.0 * nf).min(0.0);
        (BoundCase::FewLeaves, BoundComponents { tail: ln_tail, trivial, ..Default::default() })
    } else {
        let embedding = nf.ln() + (nf - 1.0 - lf) * ln_d1;
        let matching = lf * (1e-9f64.ln_1p() - 1.0 + d.ln());
        (BoundCase::ManyLeaves, BoundComponents { embedding, matching, ..Default::default() })
    };
    let composite = components.sum();
    if composite >= trivial {
        return Ok(trivial_report(only_trivial));
    }
    Ok(BoundReport { n, d, delta, leaves, case, log_bound: composite, components, headline_log })
}

pub fn thm31_bound_for_tree(t: &Tree, d: f64, delta: f64) -> Result<BoundReport> {
    thm31_bound(t.n() as u64, leaf_count(t) as u64, d, delta)
}

/// `e^{-n/2000}`.
pub fn anticoncentration_bound(n: u64) -> f64 {
    (-(n as f64) / 2000.0).exp()
}

/// `(d!)^{1/d} e / d`.
pub fn stirling_factor(d: u64) -> f64 {
    assert!(d >= 1, "stirling_factor needs d >= 1");
    let df = d as f64;
    (ln_factorial(d) / df + 1.0 - df.ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family, GraphSpec};
    use crate::spanning::{enumerate_spanning_trees, kostochka_upper};
    use crate::tree_iso::{canonical_code, enumerate_unlabeled_trees};
    use num_bigint::BigUint;
    use num_traits::One;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn brute_permanent(h: &BipartiteGraph) -> u64 {
        perms(h.nx()).iter().filter(|p| p.iter().enumerate().all(|(x, &y)| h.has_edge(x, y))).count() as u64
    }

    fn brute_copies(t: &Tree, g: &Graph) -> u64 {
        // all injections when sizes agree
        perms(g.n()).iter().filter(|p| t.edges().all(|(u, v)| g.has_edge(p[u], p[v]))).count() as u64
    }

    fn random_bipartite(rng: &mut ChaCha8Rng, n: usize, p: f64) -> BipartiteGraph {
        let edges: Vec<_> = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|_| rng.random_bool(p))
            .collect();
        BipartiteGraph::from_edges(n, n, edges).unwrap()
    }

    #[test]
    fn bregman_examples() {
        assert!(close(bregman_minc_bound(&BipartiteGraph::complete(3, 3)).unwrap(), 6f64.ln(), 1e-12));
        assert!(close(bregman_minc_bound(&BipartiteGraph::complete(4, 4)).unwrap(), 3.17805383, 1e-8));
        let h = BipartiteGraph::from_edges(2, 2, [(0, 0), (1, 0), (1, 1)]).unwrap();
        assert!(close(bregman_minc_bound(&h).unwrap(), 0.34657359, 1e-8));
        assert_eq!(permanent_ryser(&h).unwrap(), BigUint::one());
        let isolated = BipartiteGraph::from_edges(2, 2, [(0, 0)]).unwrap();
        assert_eq!(bregman_minc_bound(&isolated).unwrap(), f64::NEG_INFINITY);
        assert!(bregman_minc_bound(&BipartiteGraph::complete(2, 3)).is_err());
    }

    #[test]
    fn permanent_examples() {
        assert_eq!(permanent_ryser(&BipartiteGraph::complete(3, 3)).unwrap(), BigUint::from(6u8));
        assert_eq!(permanent_ryser(&BipartiteGraph::complete(4, 4)).unwrap(), BigUint::from(24u8));
        let id = BipartiteGraph::from_edges(5, 5, (0..5).map(|i| (i, i))).unwrap();
        assert_eq!(permanent_ryser(&id).unwrap(), BigUint::one());
        let fact12: u64 = (1..=12).product();
        assert_eq!(permanent_ryser(&BipartiteGraph::complete(12, 12)).unwrap(), BigUint::from(fact12));
        assert!(permanent_ryser(&BipartiteGraph::complete(21, 21)).is_err());
        assert!(permanent_ryser(&BipartiteGraph::complete(2, 3)).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let h = random_bipartite(&mut rng, 5, 0.6);
            assert_eq!(permanent_ryser(&h).unwrap(), BigUint::from(brute_permanent(&h)));
        }
    }

    #[test]
    fn bregman_dominates_permanent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(1..=7);
            let p = rng.random_range(0.3..1.0);
            let h = random_bipartite(&mut rng, n, p);
            let perm = permanent_ryser(&h).unwrap();
            let bound = bregman_minc_bound(&h).unwrap();
            if perm.is_zero() {
                continue;
            }
            assert!(crate::spanning::ln_count(&perm) <= bound + 1e-9);
        }
    }

    #[test]
    fn labeled_copies_in_k4() {
        let k4 = Graph::complete(4);
        let path = Tree::new(Graph::path(4)).unwrap();
        let star = Tree::new(Graph::star(4)).unwrap();
        assert_eq!(count_labeled_copies(&path, &k4).unwrap(), BigUint::from(24u8));
        assert_eq!(count_labeled_copies(&star, &k4).unwrap(), BigUint::from(24u8));
        let c4 = Graph::cycle(4).unwrap();
        assert_eq!(count_labeled_copies(&star, &c4).unwrap(), BigUint::zero());
        assert_eq!(
            iso_class_probability(&path, &k4).unwrap(),
            BigRational::new(3.into(), 4.into())
        );
        assert_eq!(
            iso_class_probability(&star, &k4).unwrap(),
            BigRational::new(1.into(), 4.into())
        );
        assert!(iso_class_probability(&star, &c4).unwrap().is_zero());
        let single = Tree::new(Graph::empty(1)).unwrap();
        assert_eq!(count_labeled_copies(&single, &k4).unwrap(), BigUint::from(4u8));
        assert!(count_labeled_copies(&path, &Graph::complete(13)).is_err());
    }

    #[test]
    fn copies_match_brute_force_and_census() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..15 {
            let n = rng.random_range(2..=6);
            let edges: Vec<_> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .filter(|_| rng.random_bool(0.6))
                .collect();
            let g = Graph::from_edges(n, edges).unwrap();
            if !g.is_connected() {
                continue;
            }
            let census = crate::tree_iso::census(&enumerate_spanning_trees(&g).unwrap()).unwrap();
            for code in enumerate_unlabeled_trees(n).unwrap() {
                let t = code.to_tree().unwrap();
                let copies = count_labeled_copies(&t, &g).unwrap();
                assert_eq!(copies, BigUint::from(brute_copies(&t, &g)));
                assert_eq!(copies / aut_size(&t), BigUint::from(census.count(&canonical_code(&t))));
            }
        }
    }

    #[test]
    fn partition_identity_and_probabilities_sum_to_one() {
        let mut graphs = vec![Graph::complete(6), Graph::petersen(), Graph::complete_bipartite(3, 4)];
        graphs.push(Graph::cycle(7).unwrap());
        for g in graphs.into_iter().filter(|g| g.n() <= 7) {
            let mut sum = BigUint::zero();
            let mut prob = BigRational::zero();
            for code in enumerate_unlabeled_trees(g.n()).unwrap() {
                let t = code.to_tree().unwrap();
                sum += count_labeled_copies(&t, &g).unwrap() / aut_size(&t);
                prob += iso_class_probability(&t, &g).unwrap();
            }
            assert_eq!(sum, count_spanning_trees(&g));
            assert!(prob.is_one());
        }
    }

    #[test]
    fn thm31_cases() {
        let few = thm31_bound(10_000, 2, 1000.0, THM_DELTA).unwrap();
        assert_eq!(few.case, BoundCase::FewLeaves);
        let gamma = (-1f64).exp() - 0.1;
        let excess = gamma - 600.0 * THM_DELTA.sqrt();
        let want = 10f64.ln() - excess * excess / 32.0 * 1e4 + 1e4 * ((1.0 + THM_DELTA) * 1000f64).ln();
        assert!(close(few.log_bound, want, 1e-6));
        assert!(close(few.components.sum(), few.log_bound, 1e-9));

        let star = thm31_bound(10_000, 9_999, 1000.0, THM_DELTA).unwrap();
        assert_eq!(star.case, BoundCase::ManyLeaves);
        let want = 1e4f64.ln() + 9_999.0 * (1e-9f64.ln_1p() - 1.0 + 1000f64.ln());
        assert!(close(star.log_bound, want, 1e-6));
        assert!(close(star.log_bound, 1e4f64.ln() + 9_999.0 * (1000f64.ln() - 1.0), 1e-4));
        assert!(close(star.components.sum(), star.log_bound, 1e-9));

        let tiny = thm31_bound(4, 2, 5.0, THM_DELTA).unwrap();
        assert_eq!(tiny.case, BoundCase::Trivial);
        assert!(close(tiny.log_bound, 4.0 * ((1.0 + THM_DELTA) * 5.0).ln(), 1e-12));

        assert!(thm31_bound(10, 10, 5.0, THM_DELTA).is_err());
        assert!(thm31_bound(100, 3, 5.0, 1e-3).is_err());
    }

    #[test]
    fn thm31_covers_labeled_copies_on_small_graphs() {
        // the trivial fallback is a genuine upper bound on regular graphs
        for seed in 0..3 {
            let spec = GraphSpec::new(Family::RandomRegular { n: 10, d: 3 }, seed);
            let g = generate(&spec).unwrap().into_graph();
            for code in enumerate_unlabeled_trees(10).unwrap().iter().step_by(7) {
                let t = code.to_tree().unwrap();
                let copies = count_labeled_copies(&t, &g).unwrap();
                let report = thm31_bound_for_tree(&t, 3.0, THM_DELTA).unwrap();
                if !copies.is_zero() {
                    assert!(crate::spanning::ln_count(&copies) <= report.log_bound + 1e-9);
                }
            }
            assert!(kostochka_upper(&g).is_ok());
        }
    }

    #[test]
    fn scalar_evaluators() {
        assert!(close(anticoncentration_bound(2000), 0.36787944117, 1e-10));
        assert!(close(anticoncentration_bound(1), 0.99950012497, 1e-10));
        assert!(close(anticoncentration_bound(13_863), 9.7653e-4, 1e-7));
        assert!(close(stirling_factor(1), std::f64::consts::E, 1e-12));
        assert!(close(stirling_factor(10), 1.2310360898, 1e-8));
        assert!(close(stirling_factor(1_000_000), 1.0000078267, 1e-9));
        let grid: Vec<u64> = (1..=100).chain((2..=60).map(|i| (1.25f64.powi(i) as u64).max(101))).collect();
        let mut values: BTreeMap<u64, f64> = BTreeMap::new();
        for d in grid.into_iter().chain([1_000_000]) {
            values.insert(d, stirling_factor(d));
        }
        let vals: Vec<f64> = values.values().copied().collect();
        assert!(vals.iter().all(|&v| v > 1.0));
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn ln_factorial_branches_agree() {
        for d in [63u64, 64, 65] {
            let direct: f64 = (2..=d).map(|i| (i as f64).ln()).sum();
            assert!(close(ln_factorial(d), direct, 1e-9));
        }
    }

    proptest! {
        #[test]
        fn report_sums_to_log_bound(n in 2u64..100_000, frac in 0.0f64..1.0, d in 1.0f64..1e6) {
            let leaves = ((n - 1) as f64 * frac) as u64;
            let r = thm31_bound(n, leaves, d, THM_DELTA).unwrap();
            prop_assert!((r.components.sum() - r.log_bound).abs() <= 1e-9 * r.log_bound.abs().max(1.0));
            prop_assert!(r.log_bound <= n as f64 * ((1.0 + THM_DELTA) * d).ln() + 1e-9);
            match r.case {
                BoundCase::FewLeaves => prop_assert!((leaves as f64) < n as f64 / 10.0),
                BoundCase::ManyLeaves => prop_assert!((leaves as f64) >= n as f64 / 10.0),
                BoundCase::Trivial => {}
            }
        }
    }
}
