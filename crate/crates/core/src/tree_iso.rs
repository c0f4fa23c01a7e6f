//! Tree isomorphism: canonical codes, automorphism counts, Prüfer sequences,
//! unlabeled-tree enumeration and class censuses.
//!
//! A canonical code is the parenthesis string of the tree rooted at its
//! centre, children sorted by their own codes. A bicentral tree is encoded as
//! the codes of its two halves, smaller first. Either way the code has exactly
//! `2n` bytes, and two trees are isomorphic iff their codes are equal.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::sample_stream;
use crate::spanning::{sample_ust, Tree};
use crate::BigCount;

/// Largest `n` accepted by [`enumerate_unlabeled_trees`].
pub const MAX_UNLABELED_N: usize = 18;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeCanonCode(Vec<u8>);

impl TreeCanonCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("codes are ASCII")
    }

    /// Vertex count of the encoded tree.
    pub fn n(&self) -> usize {
        self.0.len() / 2
    }

    /// Parses and validates a code produced by [`canonical_code`].
    pub fn parse(s: &str) -> Result<Self> {
        let code = TreeCanonCode(s.as_bytes().to_vec());
        let tree = code.to_tree()?;
        if canonical_code(&tree) != code {
            return Err(Error::NotATree(format!("`{s}` is not in canonical form")));
        }
        Ok(code)
    }

    /// A tree with this code; vertices are numbered in preorder.
    pub fn to_tree(&self) -> Result<Tree> {
        let bad = || Error::NotATree(format!("malformed code `{}`", String::from_utf8_lossy(&self.0)));
        let mut edges = Vec::new();
        let mut roots = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut next = 0;
        for &b in &self.0 {
            match b {
                b'(' => {
                    match stack.last() {
                        Some(&p) => edges.push((p, next)),
                        None => roots.push(next),
                    }
                    stack.push(next);
                    next += 1;
                }
                b')' => {
                    stack.pop().ok_or_else(bad)?;
                }
                _ => return Err(bad()),
            }
        }
        if !stack.is_empty() {
            return Err(bad());
        }
        match roots.as_slice() {
            [_] => {}
            [a, b] => edges.push((*a, *b)),
            _ => return Err(bad()),
        }
        Tree::from_edges(next, edges)
    }
}

impl fmt::Display for TreeCanonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for TreeCanonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TreeCanonCode({})", self.as_str())
    }
}

impl Serialize for TreeCanonCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// One or two centres, found by stripping leaves layer by layer.
pub fn centers(t: &Tree) -> Vec<usize> {
    let n = t.n();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut degree: Vec<usize> = (0..n).map(|v| t.degree(v)).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &leaf in &layer {
            for &w in t.neighbors(leaf) {
                degree[w] -= 1;
                if degree[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    layer.sort_unstable();
    layer
}

/// Code of the subtree at `root` with the edge to `blocked` removed, and the
/// size of its automorphism group fixing `root`.
fn rooted_code(t: &Tree, root: usize, blocked: Option<usize>) -> (Vec<u8>, BigUint) {
    let n = t.n();
    let mut parent = vec![usize::MAX; n];
    let mut order = vec![root];
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        for &w in t.neighbors(u) {
            if w != parent[u] && Some(w) != blocked.filter(|_| u == root) {
                parent[w] = u;
                order.push(w);
            }
        }
        i += 1;
    }
    let mut codes: Vec<Vec<u8>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<Vec<u8>>> = vec![Vec::new(); n];
    let mut aut = BigUint::one();
    for &u in order.iter().rev() {
        let mut kids = std::mem::take(&mut children[u]);
        kids.sort_unstable();
        let mut run = 1u64;
        for w in kids.windows(2) {
            if w[0] == w[1] {
                run += 1;
                aut *= run;
            } else {
                run = 1;
            }
        }
        let mut code = Vec::with_capacity(2 + kids.iter().map(Vec::len).sum::<usize>());
        code.push(b'(');
        for k in kids {
            code.extend_from_slice(&k);
        }
        code.push(b')');
        if u == root {
            codes[u] = code;
        } else {
            children[parent[u]].push(code);
        }
    }
    (std::mem::take(&mut codes[root]), aut)
}

fn canonical_with_aut(t: &Tree) -> (TreeCanonCode, BigUint) {
    match centers(t).as_slice() {
        [c] => {
            let (code, aut) = rooted_code(t, *c, None);
            (TreeCanonCode(code), aut)
        }
        [a, b] => {
            let (ca, aa) = rooted_code(t, *a, Some(*b));
            let (cb, ab) = rooted_code(t, *b, Some(*a));
            let swap = if ca == cb { 2u32 } else { 1 };
            let (lo, hi) = if ca <= cb { (ca, cb) } else { (cb, ca) };
            let mut code = lo;
            code.extend_from_slice(&hi);
            (TreeCanonCode(code), aa * ab * swap)
        }
        _ => unreachable!("a tree has one or two centres"),
    }
}

pub fn canonical_code(t: &Tree) -> TreeCanonCode {
    canonical_with_aut(t).0
}

/// `|Aut(T)|`: the product over vertices of the factorials of the
/// multiplicities of identical child subtrees, doubled when the two halves of
/// a bicentral tree coincide.
pub fn aut_size(t: &Tree) -> BigCount {
    canonical_with_aut(t).1
}

/// Number of degree-one vertices.
pub fn leaf_count(t: &Tree) -> usize {
    (0..t.n()).filter(|&v| t.degree(v) == 1).count()
}

/// Prüfer sequence of a labeled tree on `0..n`, `n >= 2`.
pub fn prufer_encode(t: &Tree) -> Result<Vec<usize>> {
    let n = t.n();
    if n < 2 {
        return Err(Error::NotATree("a Prüfer sequence needs at least 2 vertices".into()));
    }
    let mut degree: Vec<usize> = (0..n).map(|v| t.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut seq = Vec::with_capacity(n - 2);
    let mut ptr = (0..n).find(|&v| degree[v] == 1).expect("trees have leaves");
    let mut leaf = ptr;
    for _ in 0..n - 2 {
        let next = *t
            .neighbors(leaf)
            .iter()
            .find(|&&w| !removed[w])
            .expect("a leaf has one live neighbour");
        removed[leaf] = true;
        seq.push(next);
        degree[next] -= 1;
        if degree[next] == 1 && next < ptr {
            leaf = next;
        } else {
            ptr += 1;
            while degree[ptr] != 1 || removed[ptr] {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    Ok(seq)
}

/// Labeled tree on `0..seq.len()+2` with the given Prüfer sequence.
pub fn prufer_decode(seq: &[usize]) -> Result<Tree> {
    let n = seq.len() + 2;
    if let Some(&bad) = seq.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: bad, n });
    }
    let mut degree = vec![1usize; n];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut ptr = (0..n).find(|&v| degree[v] == 1).expect("some label is absent");
    let mut leaf = ptr;
    for &v in seq {
        edges.push((leaf, v));
        degree[leaf] = 0;
        degree[v] -= 1;
        if degree[v] == 1 && v < ptr {
            leaf = v;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    let last = (leaf + 1..n).find(|&v| degree[v] == 1).expect("two labels remain");
    edges.push((leaf, last));
    Tree::from_edges(n, edges)
}

/// Iterator over canonical level sequences of rooted trees on `n` vertices,
/// in the successor order of Beyer and Hedetniemi. The root has level 0.
struct RootedLevelSequences {
    current: Option<Vec<usize>>,
}

impl RootedLevelSequences {
    fn new(n: usize) -> Self {
        RootedLevelSequences { current: Some((0..n).collect()) }
    }
}

impl Iterator for RootedLevelSequences {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.current.take()?;
        // successor: p = last vertex deeper than level 1, q = last vertex before
        // p one level up; copy the block q..p cyclically from p onwards
        if let Some(p) = cur.iter().rposition(|&l| l > 1) {
            let q = cur[..p].iter().rposition(|&l| l == cur[p] - 1).expect("p has a parent");
            let mut next = cur.clone();
            for i in p..next.len() {
                next[i] = next[i - (p - q)];
            }
            self.current = Some(next);
        }
        Some(cur)
    }
}

fn tree_from_levels(levels: &[usize]) -> Tree {
    let mut last_at = vec![0usize; levels.len()];
    let mut edges = Vec::with_capacity(levels.len().saturating_sub(1));
    for (i, &l) in levels.iter().enumerate() {
        if l > 0 {
            edges.push((last_at[l - 1], i));
        }
        last_at[l] = i;
    }
    Tree::from_edges(levels.len(), edges).expect("level sequences describe trees")
}

/// Canonical codes of all unlabeled trees on `n` vertices, sorted.
///
/// Rooted trees are generated by level sequence and a rooted tree is kept
/// only when its root is the centre (for bicentral trees, the centre whose
/// half has the larger code), so each free tree is produced exactly once.
pub fn enumerate_unlabeled_trees(n: usize) -> Result<Vec<TreeCanonCode>> {
    if !(1..=MAX_UNLABELED_N).contains(&n) {
        return Err(Error::InvalidParameters(format!("n must lie in 1..={MAX_UNLABELED_N}, got {n}")));
    }
    let mut out = Vec::new();
    for levels in RootedLevelSequences::new(n) {
        // the centre of a tree is within n/2 of every vertex
        if levels.iter().copied().max().unwrap_or(0) > n / 2 {
            continue;
        }
        let t = tree_from_levels(&levels);
        let keep = match centers(&t).as_slice() {
            [c] => *c == 0,
            [a, b] if *a == 0 => rooted_code(&t, 0, Some(*b)).0 >= rooted_code(&t, *b, Some(0)).0,
            _ => false,
        };
        if keep {
            out.push(canonical_code(&t));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Growth statistics of unlabeled-tree counts.
#[derive(Clone, Debug, PartialEq)]
pub struct OtterFit {
    pub n_values: Vec<usize>,
    pub counts: Vec<BigCount>,
    /// `ratios[i] = counts[i+1] / counts[i]`.
    pub ratios: Vec<f64>,
    /// Last ratio corrected for the `n^{-5/2}` factor.
    pub alpha_hat: f64,
    /// `t_N / (N^{-5/2} alpha_hat^N)` at the largest `N`.
    pub c_hat: f64,
}

pub fn otter_ratio_fit(counts: &BTreeMap<usize, BigCount>) -> Result<OtterFit> {
    if counts.len() < 3 {
        return Err(Error::InvalidParameters(format!("need at least 3 counts, got {}", counts.len())));
    }
    let n_values: Vec<usize> = counts.keys().copied().collect();
    if n_values.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::InvalidParameters("counts must cover a contiguous range of n".into()));
    }
    if n_values[0] == 0 || counts.values().any(|c| c == &BigUint::ZERO) {
        return Err(Error::InvalidParameters("counts must be positive and start at n >= 1".into()));
    }
    let values: Vec<BigCount> = counts.values().cloned().collect();
    let as_f64: Vec<f64> = values.iter().map(|c| c.to_f64().unwrap_or(f64::INFINITY)).collect();
    let ratios: Vec<f64> = as_f64.windows(2).map(|w| w[1] / w[0]).collect();
    let big_n = *n_values.last().expect("non-empty") as f64;
    let last_ratio = *ratios.last().expect("at least two ratios");
    let alpha_hat = last_ratio * (big_n / (big_n - 1.0)).powf(2.5);
    let c_hat = as_f64.last().expect("non-empty") / (big_n.powf(-2.5) * alpha_hat.powf(big_n));
    Ok(OtterFit { n_values, counts: values, ratios, alpha_hat, c_hat })
}

/// Multiset of isomorphism classes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Census {
    n: Option<usize>,
    total: u64,
    classes: BTreeMap<TreeCanonCode, u64>,
}

impl Census {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, t: &Tree) -> Result<()> {
        self.add_code(canonical_code(t))
    }

    pub fn add_code(&mut self, code: TreeCanonCode) -> Result<()> {
        self.check_size(code.n())?;
        self.total += 1;
        *self.classes.entry(code).or_default() += 1;
        Ok(())
    }

    fn check_size(&mut self, n: usize) -> Result<()> {
        match self.n {
            Some(m) if m != n => Err(Error::InvalidParameters(format!(
                "census mixes trees on {m} and {n} vertices"
            ))),
            _ => {
                self.n = Some(n);
                Ok(())
            }
        }
    }

    /// Adds another census; the order of merges does not matter.
    pub fn merge(&mut self, other: Census) -> Result<()> {
        if let Some(n) = other.n {
            self.check_size(n)?;
        }
        self.total += other.total;
        for (code, c) in other.classes {
            *self.classes.entry(code).or_default() += c;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn count(&self, code: &TreeCanonCode) -> u64 {
        self.classes.get(code).copied().unwrap_or(0)
    }

    pub fn classes(&self) -> &BTreeMap<TreeCanonCode, u64> {
        &self.classes
    }

    /// Classes by decreasing count, ties by code.
    pub fn ranked(&self) -> Vec<(&TreeCanonCode, u64)> {
        let mut v: Vec<_> = self.classes.iter().map(|(k, &c)| (k, c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn max_probability(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.classes.values().copied().max().unwrap_or(0) as f64 / self.total as f64
    }
}

pub fn census<'a, I>(trees: I) -> Result<Census>
where
    I: IntoIterator<Item = &'a Tree>,
{
    let mut c = Census::new();
    for t in trees {
        c.add(t)?;
    }
    Ok(c)
}

/// Census of `samples` uniform spanning trees of `g`, tree `i` drawn from
/// stream `i` of `seed`.
pub fn sample_census(g: &Graph, samples: u64, seed: u64) -> Result<Census> {
    if g.n() == 0 || !g.is_connected() {
        return Err(Error::Disconnected);
    }
    (0..samples)
        .into_par_iter()
        .map(|i| sample_ust(g, &mut sample_stream(seed, i)).map(|t| canonical_code(&t)))
        .try_fold(Census::new, |mut c, code| {
            c.add_code(code?)?;
            Ok(c)
        })
        .try_reduce(Census::new, |mut a, b| {
            a.merge(b)?;
            Ok(a)
        })
}
