//! Spanning trees: exact counting, uniform sampling and exhaustive enumeration,
//! plus the classical estimates of the number of spanning trees.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::sample_stream;
use crate::BigCount;

/// Hard cap on [`enumerate_spanning_trees`].
pub const ENUMERATION_CAP: u64 = 1_000_000;

/// A tree spanning `0..n`: connected with exactly `n - 1` edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tree {
    graph: Graph,
}

impl Tree {
    pub fn new(graph: Graph) -> Result<Self> {
        let n = graph.n();
        if n == 0 {
            return Err(Error::NotATree("no vertices".into()));
        }
        if graph.edge_count() != n - 1 {
            return Err(Error::NotATree(format!("{} edges on {n} vertices", graph.edge_count())));
        }
        if !graph.is_connected() {
            return Err(Error::NotATree("disconnected".into()));
        }
        Ok(Tree { graph })
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Tree::new(Graph::from_edges(n, edges)?)
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn degree(&self, v: usize) -> usize {
        self.graph.degree(v)
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        self.graph.neighbors(v)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.graph.edges()
    }
}

/// Determinant of a square integer matrix by fraction-free elimination.
pub fn bareiss_determinant(matrix: &[Vec<i64>]) -> BigInt {
    let n = matrix.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|row| {
            assert_eq!(row.len(), n, "matrix must be square");
            row.iter().map(|&v| BigInt::from(v)).collect()
        })
        .collect();
    let mut prev = BigInt::one();
    let mut negate = false;
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest.iter_mut() {
            let factor = row[k].clone();
            for j in k + 1..n {
                let v = &row[j] * &pivot_row[k] - &factor * &pivot_row[j];
                // exact by Sylvester's identity
                row[j] = if prev.is_one() { v } else { v.div_floor(&prev) };
            }
            row[k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Number of spanning trees, as the determinant of a Laplacian minor.
/// Disconnected graphs give 0 and the one-vertex graph gives 1.
pub fn count_spanning_trees(g: &Graph) -> BigCount {
    let n = g.n();
    if n <= 1 {
        return BigUint::from(u8::from(n == 1));
    }
    let minor: Vec<Vec<i64>> = g
        .laplacian()
        .into_iter()
        .take(n - 1)
        .map(|mut row| {
            row.truncate(n - 1);
            row
        })
        .collect();
    let det = bareiss_determinant(&minor);
    debug_assert!(!det.is_negative());
    det.to_biguint().unwrap_or_default()
}

/// Uniform spanning tree by loop-erased random walks towards vertex 0.
pub fn sample_ust<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Result<Tree> {
    let n = g.n();
    if n == 0 || !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut in_tree = vec![false; n];
    let mut next = vec![usize::MAX; n];
    in_tree[0] = true;
    for start in 1..n {
        let mut u = start;
        while !in_tree[u] {
            let nbrs = g.neighbors(u);
            next[u] = nbrs[rng.random_range(0..nbrs.len())];
            u = next[u];
        }
        // following `next` from `start` retraces the walk with its loops erased
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    Tree::from_edges(n, (1..n).map(|u| (u, next[u])))
}

/// Disjoint-set forest with rollback, used by the enumerator.
struct RollbackDsu {
    parent: Vec<usize>,
    size: Vec<usize>,
    history: Vec<Option<(usize, usize)>>,
}

impl RollbackDsu {
    fn new(n: usize) -> Self {
        RollbackDsu { parent: (0..n).collect(), size: vec![1; n], history: Vec::new() }
    }

    fn find(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            self.history.push(None);
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.history.push(Some((ra, rb)));
        true
    }

    fn rollback(&mut self) {
        if let Some(Some((ra, rb))) = self.history.pop() {
            self.parent[rb] = rb;
            self.size[ra] -= self.size[rb];
        }
    }
}

/// `samples` uniform spanning trees; tree `i` is drawn from stream `i` of `seed`.
pub fn sample_usts(g: &Graph, samples: u64, seed: u64) -> Result<Vec<Tree>> {
    if g.n() == 0 || !g.is_connected() {
        return Err(Error::Disconnected);
    }
    (0..samples)
        .into_par_iter()
        .map(|i| sample_ust(g, &mut sample_stream(seed, i)))
        .collect()
}

/// Every spanning tree exactly once, by include/exclude branching on edges.
/// An edge is only excluded if the rest of the graph still spans, so no
/// branch is ever a dead end. Errors when the count exceeds [`ENUMERATION_CAP`].
pub fn enumerate_spanning_trees(g: &Graph) -> Result<Vec<Tree>> {
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidGraph("empty graph".into()));
    }
    let count = count_spanning_trees(g);
    if count > BigUint::from(ENUMERATION_CAP) {
        return Err(Error::CapExceeded { what: format!("{count} spanning trees"), cap: ENUMERATION_CAP });
    }
    if count.is_zero() {
        return Ok(Vec::new());
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut out = Vec::with_capacity(usize::try_from(&count).unwrap_or(0));
    let mut dsu = RollbackDsu::new(n);
    let mut chosen = Vec::with_capacity(n - 1);
    branch(n, &edges, 0, &mut dsu, &mut chosen, &mut out);
    debug_assert_eq!(BigUint::from(out.len()), count);
    Ok(out)
}

fn branch(
    n: usize,
    edges: &[(usize, usize)],
    idx: usize,
    dsu: &mut RollbackDsu,
    chosen: &mut Vec<(usize, usize)>,
    out: &mut Vec<Tree>,
) {
    if chosen.len() == n - 1 {
        out.push(Tree::from_edges(n, chosen.iter().copied()).expect("n-1 acyclic edges span"));
        return;
    }
    let Some(&(u, v)) = edges.get(idx) else {
        return;
    };
    if dsu.find(u) == dsu.find(v) {
        // a loop after contraction; it can never be used
        branch(n, edges, idx + 1, dsu, chosen, out);
        return;
    }

    dsu.union(u, v);
    chosen.push((u, v));
    branch(n, edges, idx + 1, dsu, chosen, out);
    chosen.pop();
    dsu.rollback();

    if spans_without(n, edges, idx, dsu) {
        branch(n, edges, idx + 1, dsu, chosen, out);
    }
}

/// Whether the contracted graph stays connected after deleting edge `idx`.
fn spans_without(n: usize, edges: &[(usize, usize)], idx: usize, dsu: &mut RollbackDsu) -> bool {
    let mut merges = 0;
    let mut pushed = 0;
    let components = (0..n).filter(|&v| dsu.find(v) == v).count();
    for &(a, b) in &edges[idx + 1..] {
        pushed += 1;
        if dsu.union(a, b) {
            merges += 1;
            if merges + 1 == components {
                break;
            }
        }
    }
    for _ in 0..pushed {
        dsu.rollback();
    }
    merges + 1 == components
}

/// Natural log of the upper bound `d_g(G)^n / (n - 1)`, with `d_g` the
/// geometric average degree.
pub fn kostochka_upper(g: &Graph) -> Result<f64> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameters(format!("need n >= 2, got {n}")));
    }
    let log_dg = g.geometric_avg_degree()?.ln();
    Ok(n as f64 * log_dg - ((n - 1) as f64).ln())
}

/// Leading term `n ln d_g(G)` of the matching lower bound. The full lower
/// bound subtracts an unspecified `O(log^2 k / k) n`, `k` the minimum degree.
pub fn kostochka_lower_leading(g: &Graph) -> Result<f64> {
    Ok(g.n() as f64 * g.geometric_avg_degree()?.ln())
}

/// Natural log of `((1 - 2e-10) d)^n`, the tree-count lower bound used for
/// almost-regular hosts of large degree.
pub fn tree_count_lower_eq(n: u64, d: f64) -> f64 {
    n as f64 * ((-2e-10f64).ln_1p() + d.ln())
}

/// `(d-1)^(d-1) / (d^2 - 2d)^(d/2 - 1)`, the limiting growth rate of the
/// spanning-tree count of connected `d`-regular graphs.
pub fn mckay_growth_constant(d: u32) -> Result<f64> {
    if d < 3 {
        return Err(Error::InvalidParameters(format!("need d >= 3, got {d}")));
    }
    let d = f64::from(d);
    let log = (d - 1.0) * (d - 1.0).ln() - (d / 2.0 - 1.0) * (d * d - 2.0 * d).ln();
    Ok(log.exp())
}

/// `count` as a float, saturating at infinity.
pub fn count_to_f64(count: &BigCount) -> f64 {
    use num_traits::ToPrimitive;
    count.to_f64().unwrap_or(f64::INFINITY)
}

/// Natural log of a positive count without overflow.
pub fn ln_count(count: &BigCount) -> f64 {
    if count.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = count.bits();
    if bits < 1000 {
        return count_to_f64(count).ln();
    }
    let shift = bits - 64;
    let top = count >> shift;
    count_to_f64(&top).ln() + shift as f64 * std::f64::consts::LN_2
}
