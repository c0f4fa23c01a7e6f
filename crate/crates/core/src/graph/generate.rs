//! Deterministic and seeded random graph generators.

use std::path::PathBuf;

use rand::Rng;

use super::{BipartiteGraph, Graph};
use crate::error::{Error, Result};
use crate::rng::{graph_stream, Stream};

/// Attempts allowed before a random generator gives up.
pub const RETRY_CAP: u32 = 1000;

/// Consecutive rejected pairings before checking whether any legal pair is left.
const STALL_CHECK: u32 = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Complete { n: usize },
    Cycle { n: usize },
    CompleteBipartite { nx: usize, ny: usize },
    /// Simple connected `d`-regular graph on `n` vertices.
    RandomRegular { n: usize, d: usize },
    /// Bipartite graph with `n` vertices per side and all degrees in
    /// `[(1-delta)d, (1+delta)d]`.
    RandomBipartiteRegular { n: usize, d: usize, delta: f64 },
    FromFile { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphSpec {
    pub family: Family,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Generated {
    Graph(Graph),
    Bipartite(BipartiteGraph),
}

impl Generated {
    /// A bipartite view: bipartite outputs as-is, ordinary graphs through their
    /// double cover.
    pub fn into_bipartite(self) -> BipartiteGraph {
        match self {
            Generated::Graph(g) => g.bipartite_double_cover(),
            Generated::Bipartite(h) => h,
        }
    }

    /// An ordinary-graph view: bipartite outputs are flattened with X first.
    pub fn into_graph(self) -> Graph {
        match self {
            Generated::Graph(g) => g,
            Generated::Bipartite(h) => h.to_graph(),
        }
    }
}

impl GraphSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        GraphSpec { family, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameters(msg));
        match &self.family {
            Family::Complete { n } if *n == 0 => bad("complete graph needs n >= 1".into()),
            Family::Cycle { n } if *n < 3 => bad(format!("cycle needs n >= 3, got {n}")),
            Family::RandomRegular { n, d } => {
                if *d >= *n {
                    bad(format!("random-regular needs d < n, got d={d}, n={n}"))
                } else if (n * d) % 2 == 1 {
                    bad(format!("random-regular needs n*d even, got n={n}, d={d}"))
                } else if *d == 0 && *n > 1 {
                    bad("random-regular with d=0 cannot be connected".into())
                } else {
                    Ok(())
                }
            }
            Family::RandomBipartiteRegular { n, d, delta } => {
                if *n == 0 || *d == 0 {
                    bad("random-bipartite-regular needs n >= 1 and d >= 1".into())
                } else if *d > *n {
                    bad(format!("random-bipartite-regular needs d <= n, got d={d}, n={n}"))
                } else if !(delta.is_finite() && *delta >= 0.0 && *delta < 1.0) {
                    bad(format!("delta must lie in [0, 1), got {delta}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Builds the graph described by `spec`. Same spec and seed give the same graph.
pub fn generate(spec: &GraphSpec) -> Result<Generated> {
    spec.validate()?;
    match &spec.family {
        Family::Complete { n } => Ok(Generated::Graph(Graph::complete(*n))),
        Family::Cycle { n } => Ok(Generated::Graph(Graph::cycle(*n)?)),
        Family::CompleteBipartite { nx, ny } => {
            Ok(Generated::Bipartite(BipartiteGraph::complete(*nx, *ny)))
        }
        Family::RandomRegular { n, d } => random_regular(*n, *d, spec.seed).map(Generated::Graph),
        Family::RandomBipartiteRegular { n, d, delta } => {
            random_bipartite_regular(*n, *d, *delta, spec.seed).map(Generated::Bipartite)
        }
        Family::FromFile { path } => {
            let file = std::fs::File::open(path)?;
            super::read_edge_list(std::io::BufReader::new(file))
        }
    }
}

fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    let mut last = "pairing dead-ended";
    for attempt in 0..RETRY_CAP {
        let mut rng = graph_stream(seed, attempt);
        match pair_regular(n, d, &mut rng) {
            Some(g) if g.is_connected() => return Ok(g),
            Some(_) => last = "result was disconnected",
            None => last = "pairing dead-ended",
        }
    }
    Err(Error::RetryCapExceeded { attempts: RETRY_CAP, reason: last.into() })
}

/// One attempt of the configuration model with per-pair rejection of loops and
/// repeated edges. Returns `None` when no legal pair remains.
fn pair_regular(n: usize, d: usize, rng: &mut Stream) -> Option<Graph> {
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::with_capacity(d); n];
    while !points.is_empty() {
        let mut rejected = 0;
        loop {
            let i = rng.random_range(0..points.len());
            let j = rng.random_range(0..points.len());
            let (u, v) = (points[i], points[j]);
            if i != j && u != v && !adj[u].contains(&v) {
                adj[u].push(v);
                adj[v].push(u);
                points.swap_remove(i.max(j));
                points.swap_remove(i.min(j));
                break;
            }
            rejected += 1;
            if rejected >= STALL_CHECK {
                let legal = points.iter().enumerate().any(|(a, &u)| {
                    points[a + 1..].iter().any(|&v| u != v && !adj[u].contains(&v))
                });
                if !legal {
                    return None;
                }
                rejected = 0;
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    Some(Graph::from_sorted_adjacency(adj))
}

fn random_bipartite_regular(n: usize, d: usize, delta: f64, seed: u64) -> Result<BipartiteGraph> {
    let lo = ((1.0 - delta) * d as f64).ceil().max(1.0) as usize;
    let hi = (((1.0 + delta) * d as f64).floor() as usize).min(n);
    if lo > hi {
        return Err(Error::InvalidParameters(format!(
            "no integer degree in [{}, {}]",
            (1.0 - delta) * d as f64,
            (1.0 + delta) * d as f64
        )));
    }
    for attempt in 0..RETRY_CAP {
        let mut rng = graph_stream(seed, attempt);
        let (dx, dy) = balanced_degrees(n, lo, hi, &mut rng);
        if let Some(h) = pair_bipartite(&dx, &dy, &mut rng) {
            return Ok(h);
        }
    }
    Err(Error::RetryCapExceeded { attempts: RETRY_CAP, reason: "pairing dead-ended".into() })
}

/// Degree sequences for both sides, drawn uniformly from `[lo, hi]` and then
/// nudged one unit at a time until the totals agree.
fn balanced_degrees(n: usize, lo: usize, hi: usize, rng: &mut Stream) -> (Vec<usize>, Vec<usize>) {
    let mut dx: Vec<usize> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let mut dy: Vec<usize> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    loop {
        let sx: usize = dx.iter().sum();
        let sy: usize = dy.iter().sum();
        let larger = match sx.cmp(&sy) {
            std::cmp::Ordering::Equal => return (dx, dy),
            std::cmp::Ordering::Greater => &mut dx,
            std::cmp::Ordering::Less => &mut dy,
        };
        // the side with the larger total always has a vertex above `lo`
        let candidates: Vec<usize> = (0..n).filter(|&i| larger[i] > lo).collect();
        let pick = candidates[rng.random_range(0..candidates.len())];
        larger[pick] -= 1;
    }
}

fn pair_bipartite(dx: &[usize], dy: &[usize], rng: &mut Stream) -> Option<BipartiteGraph> {
    let n = dx.len();
    let mut xs: Vec<usize> = (0..n).flat_map(|x| std::iter::repeat_n(x, dx[x])).collect();
    let mut ys: Vec<usize> = (0..dy.len()).flat_map(|y| std::iter::repeat_n(y, dy[y])).collect();
    let mut x_adj: Vec<Vec<usize>> = dx.iter().map(|&k| Vec::with_capacity(k)).collect();
    while !xs.is_empty() {
        let mut rejected = 0;
        loop {
            let i = rng.random_range(0..xs.len());
            let j = rng.random_range(0..ys.len());
            let (x, y) = (xs[i], ys[j]);
            if !x_adj[x].contains(&y) {
                x_adj[x].push(y);
                xs.swap_remove(i);
                ys.swap_remove(j);
                break;
            }
            rejected += 1;
            if rejected >= STALL_CHECK {
                let legal = xs.iter().any(|&x| ys.iter().any(|y| !x_adj[x].contains(y)));
                if !legal {
                    return None;
                }
                rejected = 0;
            }
        }
    }
    for list in &mut x_adj {
        list.sort_unstable();
    }
    Some(BipartiteGraph::from_adjacency(dy.len(), x_adj))
}
