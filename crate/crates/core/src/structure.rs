//! FIFO and LIFO candidates as label-homogeneous paths, and their sizing.
//!
//! A path whose consecutive edges all carry the FIFO (resp. LIFO) label is a
//! compatibility clique: every pair of its nodes can share one FIFO (resp.
//! LIFO). Candidates are found by longest-path dynamic programming on the
//! label-restricted sub-DAG.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{CompatGraph, Label};
use crate::model::{Cycle, TimedDatum};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("expected a {expected} path, got a {got} path")]
    WrongLabel { expected: Label, got: Label },
    #[error("a structure path needs at least two nodes")]
    TooShort,
    #[error("nodes {from} -> {to} are not joined by a {label} edge")]
    Broken { from: usize, to: usize, label: Label },
    #[error("register is not a path label")]
    RegisterPath,
}

/// Label-homogeneous path through the compatibility graph (node indices in
/// chronological order).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StructPath {
    label: Label,
    nodes: Vec<usize>,
}

impl StructPath {
    /// Checks that `nodes` forms a path of `label` edges in `g`.
    pub fn new(g: &CompatGraph, label: Label, nodes: Vec<usize>) -> Result<Self, StructureError> {
        if label == Label::Register {
            return Err(StructureError::RegisterPath);
        }
        if nodes.len() < 2 {
            return Err(StructureError::TooShort);
        }
        for w in nodes.windows(2) {
            if w[0] >= w[1] || g.label(w[0], w[1]) != Some(label) {
                return Err(StructureError::Broken { from: w[0], to: w[1], label });
            }
        }
        Ok(StructPath { label, nodes })
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn data<'a>(&'a self, g: &'a CompatGraph) -> impl Iterator<Item = &'a TimedDatum> + 'a {
        self.nodes.iter().map(move |&i| g.node(i))
    }

    pub fn ids(&self, g: &CompatGraph) -> Vec<String> {
        self.data(g).map(|d| d.id.clone()).collect()
    }
}

/// Maximal paths of `label` over the whole graph.
pub fn longest_paths(g: &CompatGraph, label: Label) -> Vec<StructPath> {
    longest_paths_among(g, label, &vec![true; g.node_count()])
}

/// Maximal paths of `label` restricted to nodes with `alive[i]`.
///
/// For every live node the longest path running through it is built from
/// the longest path ending there and the longest path starting there; the
/// result is maximal at both ends. Duplicates are dropped and the output is
/// ordered by start node, then lexicographically by node indices. Ties in
/// the DP pick the lowest-index neighbour.
pub fn longest_paths_among(g: &CompatGraph, label: Label, alive: &[bool]) -> Vec<StructPath> {
    if label == Label::Register {
        return Vec::new();
    }
    let n = g.node_count();
    assert_eq!(alive.len(), n);
    const NIL: u32 = u32::MAX;

    let mut suffix = vec![0u32; n];
    let mut next = vec![NIL; n];
    for i in (0..n).rev() {
        if !alive[i] {
            continue;
        }
        let mut best = 1;
        for &j in g.successors(i, label) {
            let j = j as usize;
            if alive[j] && suffix[j] + 1 > best {
                best = suffix[j] + 1;
                next[i] = j as u32;
            }
        }
        suffix[i] = best;
    }

    let mut prefix = vec![0u32; n];
    let mut prev = vec![NIL; n];
    for j in 0..n {
        if !alive[j] {
            continue;
        }
        let mut best = 1;
        for &i in g.predecessors(j, label) {
            let i = i as usize;
            if alive[i] && prefix[i] + 1 > best {
                best = prefix[i] + 1;
                prev[j] = i as u32;
            }
        }
        prefix[j] = best;
    }

    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    for s in 0..n {
        if !alive[s] || prefix[s] + suffix[s] < 3 {
            continue;
        }
        let mut path = Vec::with_capacity((prefix[s] + suffix[s] - 1) as usize);
        let mut cur = s;
        while prev[cur] != NIL {
            cur = prev[cur] as usize;
            path.push(cur);
        }
        path.reverse();
        cur = s;
        path.push(cur);
        while next[cur] != NIL {
            cur = next[cur] as usize;
            path.push(cur);
        }
        found.insert(path);
    }
    found.into_iter().map(|nodes| StructPath { label, nodes }).collect()
}

/// LIFO depth: the members are nested, so every one of them is resident at once.
pub fn lifo_depth(p: &StructPath) -> Result<usize, StructureError> {
    if p.label != Label::Lifo {
        return Err(StructureError::WrongLabel { expected: Label::Lifo, got: p.label });
    }
    Ok(p.len())
}

/// FIFO depth: one plus the largest number of FIFO edges entering a path
/// node from other path nodes.
///
/// Walks from the last node backwards; node `k` has only `k` possible
/// in-path predecessors, so the walk stops once `k` no longer exceeds the
/// best count found.
pub fn fifo_depth(g: &CompatGraph, p: &StructPath) -> Result<usize, StructureError> {
    if p.label != Label::Fifo {
        return Err(StructureError::WrongLabel { expected: Label::Fifo, got: p.label });
    }
    let nodes = &p.nodes;
    let mut best = 0usize;
    for pos in (1..nodes.len()).rev() {
        if pos <= best {
            break;
        }
        let incoming = nodes[..pos].iter().filter(|&&i| g.label(i, nodes[pos]) == Some(Label::Fifo)).count();
        best = best.max(incoming);
    }
    Ok(1 + best)
}

/// Depth of the structure a path describes.
pub fn path_depth(g: &CompatGraph, p: &StructPath) -> usize {
    match p.label {
        Label::Fifo => fifo_depth(g, p).expect("label checked"),
        Label::Lifo => lifo_depth(p).expect("label checked"),
        Label::Register => 1,
    }
}

/// Peak number of simultaneously resident data.
///
/// A datum is resident from its write up to (not including) its last read,
/// so at a cycle where one datum leaves and another arrives, the leaving one
/// goes first.
pub fn occupancy_oracle<'a, I>(data: I) -> usize
where
    I: IntoIterator<Item = &'a TimedDatum>,
{
    // (time, delta) with departures (-1) sorted before arrivals (+1)
    let mut events: Vec<(Cycle, i64)> = Vec::new();
    for d in data {
        let life = d.lifetime();
        if life.start == life.end {
            continue;
        }
        events.push((life.start, 1));
        events.push((life.end, -1));
    }
    events.sort_unstable();
    let mut cur = 0i64;
    let mut peak = 0i64;
    for (_, delta) in events {
        cur += delta;
        peak = peak.max(cur);
    }
    peak as usize
}
