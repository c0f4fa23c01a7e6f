//! Plain-text edge lists.
//!
//! Ordinary graphs: a header `n m`, then `m` lines `u v`.
//! Bipartite graphs: a header `nx ny m`, then `m` lines `x y` with `x` an X id
//! and `y` a Y id. Ids are 0-based, fields whitespace-separated, lines end in LF.

use std::io::{BufRead, Write};

use super::{BipartiteGraph, Generated, Graph};
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", g.n(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

pub fn write_bipartite_edge_list<W: Write>(h: &BipartiteGraph, mut out: W) -> Result<()> {
    writeln!(out, "{} {} {}", h.nx(), h.ny(), h.edge_count())?;
    for (x, y) in h.edges() {
        writeln!(out, "{x} {y}")?;
    }
    Ok(())
}

/// Reads either format; a three-field header selects the bipartite one.
pub fn read_edge_list<R: BufRead>(input: R) -> Result<Generated> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));

    let (line_no, header) = match lines.next() {
        Some((no, l)) => (no, l?),
        None => return Err(Error::Parse { line: 1, reason: "missing header".into() }),
    };
    let header = parse_fields(&header, line_no)?;
    let (bipartite, sizes, m) = match header.as_slice() {
        [n, m] => (false, (*n, 0), *m),
        [nx, ny, m] => (true, (*nx, *ny), *m),
        _ => {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("header needs 2 or 3 fields, found {}", header.len()),
            })
        }
    };

    let mut edges = Vec::with_capacity(m);
    for (no, line) in lines {
        let fields = parse_fields(&line?, no)?;
        match fields.as_slice() {
            [u, v] => edges.push((*u, *v)),
            _ => {
                return Err(Error::Parse {
                    line: no,
                    reason: format!("edge line needs 2 fields, found {}", fields.len()),
                })
            }
        }
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: line_no,
            reason: format!("header declares {m} edges, found {}", edges.len()),
        });
    }

    if bipartite {
        BipartiteGraph::from_edges(sizes.0, sizes.1, edges).map(Generated::Bipartite)
    } else {
        Graph::from_edges(sizes.0, edges).map(Generated::Graph)
    }
}

fn parse_fields(line: &str, no: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line: no,
                reason: format!("`{tok}` is not a nonnegative integer"),
            })
        })
        .collect()
}
