//! Simple undirected graphs and bipartite graphs.
//!
//! Both types are immutable once built. Vertex ids are `0..n`; bipartite
//! graphs number each side independently.

mod generate;
mod io;

pub use generate::{generate, Family, Generated, GraphSpec, RETRY_CAP};
pub use io::{read_edge_list, write_bipartite_edge_list, write_edge_list};

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Simple undirected graph stored as sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// `n` isolated vertices.
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    /// Builds a graph from an edge list, rejecting loops, repeated edges and
    /// out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("repeated edge {u}-{}", w[0])));
            }
        }
        Ok(Graph { adj })
    }

    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<usize>>) -> Self {
        debug_assert!(adj.iter().all(|l| l.windows(2).all(|w| w[0] < w[1])));
        Graph { adj }
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n)
            .map(|u| (0..n).filter(|&v| v != u).collect())
            .collect();
        Graph { adj }
    }

    /// The cycle `C_n`; needs `n >= 3`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameters(format!("cycle needs n >= 3, got {n}")));
        }
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn path(n: usize) -> Self {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path edges are valid")
    }

    /// Star with centre 0 and `n - 1` leaves.
    pub fn star(n: usize) -> Self {
        Graph::from_edges(n, (1..n).map(|i| (0, i))).expect("star edges are valid")
    }

    /// `K_{a,b}` with parts `0..a` and `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        Graph::from_edges(a + b, (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))))
            .expect("complete bipartite edges are valid")
    }

    pub fn petersen() -> Self {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        Graph::from_edges(10, outer.chain(spokes).chain(inner)).expect("petersen edges are valid")
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.adj.iter().map(Vec::len)
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.degrees().min().unwrap_or(0)
    }

    /// Sorted neighbours of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().copied().filter(move |&v| u < v).map(move |v| (u, v)))
    }

    /// True iff every degree lies in the closed interval `[(1-delta)d, (1+delta)d]`.
    pub fn check_almost_regular(&self, d: usize, delta: f64) -> bool {
        let (lo, hi) = degree_window(d, delta);
        self.degrees().all(|k| (k as f64) >= lo && (k as f64) <= hi)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == n
    }

    /// Combinatorial Laplacian `D - A`.
    pub fn laplacian(&self) -> Vec<Vec<i64>> {
        let n = self.n();
        let mut lap = vec![vec![0i64; n]; n];
        for (u, row) in lap.iter_mut().enumerate() {
            row[u] = self.degree(u) as i64;
            for &v in &self.adj[u] {
                row[v] = -1;
            }
        }
        lap
    }

    /// Geometric mean of the degrees, computed in log space.
    pub fn geometric_avg_degree(&self) -> Result<f64> {
        if self.n() == 0 {
            return Err(Error::InvalidGraph("empty graph".into()));
        }
        let mut log_sum = 0.0;
        for (v, k) in self.degrees().enumerate() {
            if k == 0 {
                return Err(Error::InvalidGraph(format!("vertex {v} has degree 0")));
            }
            log_sum += (k as f64).ln();
        }
        Ok((log_sum / self.n() as f64).exp())
    }

    /// Bipartite graph on two copies of the vertex set with `x_u ~ y_v` iff `uv` is an edge.
    pub fn bipartite_double_cover(&self) -> BipartiteGraph {
        BipartiteGraph::from_adjacency(self.n(), self.adj.clone())
    }
}

pub(crate) fn degree_window(d: usize, delta: f64) -> (f64, f64) {
    let d = d as f64;
    ((1.0 - delta) * d, (1.0 + delta) * d)
}

/// Bipartite graph with parts `X = 0..nx` and `Y = 0..ny`.
///
/// Complete bipartite graphs are stored implicitly so that the very large
/// instances used in simulations cost no memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    nx: usize,
    ny: usize,
    adj: Adjacency,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Adjacency {
    Explicit { x_adj: Vec<Vec<usize>>, y_adj: Vec<Vec<usize>> },
    Complete,
}

/// Neighbour iterator for [`BipartiteGraph`].
#[derive(Clone, Debug)]
pub enum Neighbors<'a> {
    Listed(std::slice::Iter<'a, usize>),
    All(std::ops::Range<usize>),
}

impl Iterator for Neighbors<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            Neighbors::Listed(it) => it.next().copied(),
            Neighbors::All(r) => r.next(),
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self {
            Neighbors::Listed(it) => it.size_hint(),
            Neighbors::All(r) => r.size_hint(),
        }
    }
}

impl ExactSizeIterator for Neighbors<'_> {}

impl BipartiteGraph {
    pub fn from_edges<I>(nx: usize, ny: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut x_adj = vec![Vec::new(); nx];
        for (x, y) in edges {
            if x >= nx {
                return Err(Error::VertexOutOfRange { vertex: x, n: nx });
            }
            if y >= ny {
                return Err(Error::VertexOutOfRange { vertex: y, n: ny });
            }
            x_adj[x].push(y);
        }
        for (x, list) in x_adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("repeated edge x{x}-y{}", w[0])));
            }
        }
        Ok(Self::from_adjacency(ny, x_adj))
    }

    /// `x_adj` must hold sorted, duplicate-free lists of Y ids below `ny`.
    pub(crate) fn from_adjacency(ny: usize, x_adj: Vec<Vec<usize>>) -> Self {
        let nx = x_adj.len();
        let mut y_adj = vec![Vec::new(); ny];
        for (x, list) in x_adj.iter().enumerate() {
            for &y in list {
                y_adj[y].push(x);
            }
        }
        BipartiteGraph { nx, ny, adj: Adjacency::Explicit { x_adj, y_adj } }
    }

    /// `K_{nx,ny}`, stored implicitly.
    pub fn complete(nx: usize, ny: usize) -> Self {
        BipartiteGraph { nx, ny, adj: Adjacency::Complete }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn is_complete(&self) -> bool {
        match &self.adj {
            Adjacency::Complete => true,
            Adjacency::Explicit { .. } => self.edge_count() == self.nx * self.ny,
        }
    }

    pub fn x_degree(&self, x: usize) -> usize {
        match &self.adj {
            Adjacency::Explicit { x_adj, .. } => x_adj[x].len(),
            Adjacency::Complete => self.ny,
        }
    }

    pub fn y_degree(&self, y: usize) -> usize {
        match &self.adj {
            Adjacency::Explicit { y_adj, .. } => y_adj[y].len(),
            Adjacency::Complete => self.nx,
        }
    }

    /// The `i`-th neighbour of `x` in increasing order.
    pub fn x_neighbor(&self, x: usize, i: usize) -> usize {
        match &self.adj {
            Adjacency::Explicit { x_adj, .. } => x_adj[x][i],
            Adjacency::Complete => {
                assert!(i < self.ny);
                i
            }
        }
    }

    pub fn x_neighbors(&self, x: usize) -> Neighbors<'_> {
        match &self.adj {
            Adjacency::Explicit { x_adj, .. } => Neighbors::Listed(x_adj[x].iter()),
            Adjacency::Complete => Neighbors::All(0..self.ny),
        }
    }

    pub fn y_neighbors(&self, y: usize) -> Neighbors<'_> {
        match &self.adj {
            Adjacency::Explicit { y_adj, .. } => Neighbors::Listed(y_adj[y].iter()),
            Adjacency::Complete => Neighbors::All(0..self.nx),
        }
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        match &self.adj {
            Adjacency::Explicit { x_adj, .. } => x_adj[x].binary_search(&y).is_ok(),
            Adjacency::Complete => x < self.nx && y < self.ny,
        }
    }

    pub fn x_degrees(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nx).map(|x| self.x_degree(x))
    }

    pub fn y_degrees(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ny).map(|y| self.y_degree(y))
    }

    pub fn max_x_degree(&self) -> usize {
        self.x_degrees().max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.x_degrees().sum()
    }

    /// Edges `(x, y)` ordered by `x` then `y`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.nx).flat_map(move |x| self.x_neighbors(x).map(move |y| (x, y)))
    }

    /// Every degree on both sides within `[(1-delta)d, (1+delta)d]`.
    pub fn check_almost_regular(&self, d: usize, delta: f64) -> bool {
        let (lo, hi) = degree_window(d, delta);
        self.x_degrees()
            .chain(self.y_degrees())
            .all(|k| (k as f64) >= lo && (k as f64) <= hi)
    }

    /// The same graph on vertices `0..nx+ny`, X first.
    pub fn to_graph(&self) -> Graph {
        let nx = self.nx;
        let mut adj: Vec<Vec<usize>> =
            (0..nx).map(|x| self.x_neighbors(x).map(|y| nx + y).collect()).collect();
        adj.extend((0..self.ny).map(|y| self.y_neighbors(y).collect()));
        Graph::from_sorted_adjacency(adj)
    }
}
