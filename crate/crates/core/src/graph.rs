//! Pairwise storage compatibility and the labeled compatibility DAG.
//!
//! Every pair of data (in chronological order of their writes) is classified
//! as storable in a common Register, FIFO or LIFO, or as incompatible. The
//! graph keeps one labeled edge per compatible pair, always pointing forward
//! in chronological order, so it is acyclic by construction.

use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ConstraintSet, TimedDatum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Label {
    #[serde(rename = "R")]
    Register,
    #[serde(rename = "F")]
    Fifo,
    #[serde(rename = "L")]
    Lifo,
}

impl Label {
    pub fn letter(self) -> char {
        match self {
            Label::Register => 'R',
            Label::Fifo => 'F',
            Label::Lifo => 'L',
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Outcome of classifying an ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Compat {
    Edge(Label),
    Incompatible,
}

impl Compat {
    pub fn label(self) -> Option<Label> {
        match self {
            Compat::Edge(l) => Some(l),
            Compat::Incompatible => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("pair ({first}, {second}) is not in chronological order")]
    Unordered { first: String, second: String },
    #[error("datum `{0}` is read more than once; synthesis supports single-read data only")]
    MultiRead(String),
    #[error("constraint set is invalid: {0}")]
    Invalid(String),
}

/// Classifies the pair `(a, b)` where `a` is written no later than `b`.
///
/// Register when `b` is written no earlier than `a`'s last read; FIFO when
/// the lifetimes overlap and `b` is first read after `a`'s last read; LIFO
/// when `b` is written after `a` and last read before `a`'s first read.
pub fn classify_pair(a: &TimedDatum, b: &TimedDatum) -> Result<Compat, GraphError> {
    if a.tau_min() > b.tau_min() {
        return Err(GraphError::Unordered { first: a.id.clone(), second: b.id.clone() });
    }
    Ok(classify_times((a.tau_min(), a.tau_first(), a.tau_max()), (b.tau_min(), b.tau_first(), b.tau_max())))
}

type Times = (u64, u64, u64);

#[inline]
fn classify_times((a_min, a_first, a_max): Times, (b_min, b_first, b_max): Times) -> Compat {
    if b_min >= a_max {
        Compat::Edge(Label::Register)
    } else if b_min > a_min && b_first > a_max {
        Compat::Edge(Label::Fifo)
    } else if b_min > a_min && a_first > b_max {
        Compat::Edge(Label::Lifo)
    } else {
        Compat::Incompatible
    }
}

const NONE: u8 = 0;

fn encode(c: Compat) -> u8 {
    match c {
        Compat::Incompatible => NONE,
        Compat::Edge(Label::Register) => 1,
        Compat::Edge(Label::Fifo) => 2,
        Compat::Edge(Label::Lifo) => 3,
    }
}

fn decode(code: u8) -> Option<Label> {
    match code {
        1 => Some(Label::Register),
        2 => Some(Label::Fifo),
        3 => Some(Label::Lifo),
        _ => None,
    }
}

#[inline]
fn tri_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EdgeCounts {
    pub register: usize,
    pub fifo: usize,
    pub lifo: usize,
    pub incompatible: usize,
}

impl EdgeCounts {
    pub fn edges(&self) -> usize {
        self.register + self.fifo + self.lifo
    }
}

/// Compatibility DAG over data in chronological order.
///
/// Nodes are indexed `0..n` in chronological order. The source and sink
/// poles are implicit: every node is reachable from the source and reaches
/// the sink. Labels are stored in a packed upper-triangular table, with
/// per-label successor/predecessor lists for the FIFO and LIFO sub-DAGs.
#[derive(Debug, Clone)]
pub struct CompatGraph {
    nodes: Vec<TimedDatum>,
    labels: Vec<u8>,
    succ: [Vec<Vec<u32>>; 2],
    pred: [Vec<Vec<u32>>; 2],
    counts: EdgeCounts,
}

fn sub_dag_slot(label: Label) -> Option<usize> {
    match label {
        Label::Fifo => Some(0),
        Label::Lifo => Some(1),
        Label::Register => None,
    }
}

impl CompatGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[TimedDatum] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &TimedDatum {
        &self.nodes[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|d| d.id == id)
    }

    pub fn edge_count(&self) -> usize {
        self.counts.edges()
    }

    pub fn counts(&self) -> EdgeCounts {
        self.counts
    }

    /// Label of the edge between two nodes, in either argument order.
    pub fn label(&self, i: usize, j: usize) -> Option<Label> {
        if i == j {
            return None;
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        decode(self.labels[tri_index(lo, hi)])
    }

    /// Successors of `i` along edges carrying `label` (FIFO or LIFO only).
    pub fn successors(&self, i: usize, label: Label) -> &[u32] {
        match sub_dag_slot(label) {
            Some(s) => &self.succ[s][i],
            None => &[],
        }
    }

    pub fn predecessors(&self, i: usize, label: Label) -> &[u32] {
        match sub_dag_slot(label) {
            Some(s) => &self.pred[s][i],
            None => &[],
        }
    }

    /// All edges, ordered by (from, to).
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let n = self.nodes.len();
        (0..n).flat_map(move |i| {
            ((i + 1)..n)
                .filter_map(move |j| decode(self.labels[tri_index(i, j)]).map(|label| Edge { from: i, to: j, label }))
        })
    }

    /// DOT rendering; the source and sink poles are omitted.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph compat {\n  rankdir=LR;\n");
        for d in &self.nodes {
            let _ = writeln!(s, "  \"{}\";", escape(&d.id));
        }
        for e in self.edges() {
            let _ = writeln!(
                s,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                escape(&self.nodes[e.from].id),
                escape(&self.nodes[e.to].id),
                e.label
            );
        }
        s.push_str("}\n");
        s
    }

    /// JSON dump: node ids in order and `[from, to, label]` triples.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            nodes: Vec<&'a str>,
            edges: Vec<(&'a str, &'a str, Label)>,
        }
        let dump = Dump {
            nodes: self.nodes.iter().map(|d| d.id.as_str()).collect(),
            edges: self
                .edges()
                .map(|e| (self.nodes[e.from].id.as_str(), self.nodes[e.to].id.as_str(), e.label))
                .collect(),
        };
        crate::canonical_json(&dump)
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn export_dot(g: &CompatGraph) -> String {
    g.to_dot()
}

/// Classifies every chronologically ordered pair of a validated,
/// single-read constraint set.
pub fn build_graph(cs: &ConstraintSet) -> Result<CompatGraph, GraphError> {
    if let Some(id) = cs.multi_read_data().first() {
        return Err(GraphError::MultiRead(id.to_string()));
    }
    let violations = cs.validate();
    if !violations.is_empty() {
        let msg = violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
        return Err(GraphError::Invalid(msg));
    }
    Ok(build_unchecked(cs.chronological().into_iter().cloned().collect()))
}

fn build_unchecked(nodes: Vec<TimedDatum>) -> CompatGraph {
    let n = nodes.len();
    let times: Vec<Times> = nodes.iter().map(|d| (d.tau_min(), d.tau_first(), d.tau_max())).collect();
    let mut labels = vec![NONE; n * n.saturating_sub(1) / 2];
    let mut succ = [vec![Vec::new(); n], vec![Vec::new(); n]];
    let mut pred = [vec![Vec::new(); n], vec![Vec::new(); n]];
    let mut counts = EdgeCounts::default();
    for j in 1..n {
        let base = j * (j - 1) / 2;
        for i in 0..j {
            let c = classify_times(times[i], times[j]);
            labels[base + i] = encode(c);
            match c {
                Compat::Incompatible => counts.incompatible += 1,
                Compat::Edge(Label::Register) => counts.register += 1,
                Compat::Edge(l) => {
                    if l == Label::Fifo {
                        counts.fifo += 1;
                    } else {
                        counts.lifo += 1;
                    }
                    let s = sub_dag_slot(l).unwrap();
                    succ[s][i].push(j as u32);
                    pred[s][j].push(i as u32);
                }
            }
        }
    }
    // pred lists are filled in increasing i; succ lists in increasing j
    CompatGraph { nodes, labels, succ, pred, counts }
}
