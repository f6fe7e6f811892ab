//! Greedy assignment of data to FIFO, LIFO and register structures.
//!
//! Each round enumerates FIFO and LIFO candidates on the nodes not yet
//! assigned, scores them with user-weighted metrics, fuses the winner into a
//! hierarchical node and removes its members. Whatever is left when no path
//! of two or more nodes remains becomes a single-datum register.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CompatGraph, Label};
use crate::model::{Cycle, Interval, TimedDatum};
use crate::structure::{longest_paths_among, path_depth, StructPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Fifo,
    Lifo,
    #[serde(rename = "reg")]
    Register,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Fifo => "fifo",
            Kind::Lifo => "lifo",
            Kind::Register => "reg",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Fifo => f.write_str("FIFO"),
            Kind::Lifo => f.write_str("LIFO"),
            Kind::Register => f.write_str("Reg"),
        }
    }
}

impl From<Label> for Kind {
    fn from(l: Label) -> Self {
        match l {
            Label::Fifo => Kind::Fifo,
            Label::Lifo => Kind::Lifo,
            Label::Register => Kind::Register,
        }
    }
}

/// Relative importance of the candidate metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weights {
    pub depth: f64,
    pub demux: f64,
    pub util: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { depth: 1.0, demux: 0.5, util: 1.0 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightsError {
    #[error("expected `key=value`, got `{0}`")]
    Syntax(String),
    #[error("unknown weight `{0}` (expected depth, demux or util)")]
    UnknownKey(String),
    #[error("weight `{key}` must be a finite non-negative number, got `{value}`")]
    BadValue { key: String, value: String },
}

impl FromStr for Weights {
    type Err = WeightsError;

    /// Parses `depth=X,demux=Y,util=Z`; omitted keys keep their defaults.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut w = Weights::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| WeightsError::Syntax(part.to_string()))?;
            let (key, value) = (key.trim(), value.trim());
            let v: f64 = value
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| WeightsError::BadValue { key: key.to_string(), value: value.to_string() })?;
            match key {
                "depth" => w.depth = v,
                "demux" => w.demux = v,
                "util" => w.util = v,
                _ => return Err(WeightsError::UnknownKey(key.to_string())),
            }
        }
        Ok(w)
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "depth={},demux={},util={}", self.depth, self.demux, self.util)
    }
}

/// Per-candidate metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub members: usize,
    pub depth: usize,
    /// Distinct input ports feeding plus distinct output ports served.
    pub demux: usize,
    /// Resident datum-cycles over `depth * span`; in (0, 1].
    pub utilization: f64,
}

impl Metrics {
    pub fn depth_saving(&self) -> f64 {
        self.members as f64 - self.depth as f64
    }
}

/// `w.depth * (members - depth) + w.util * utilization - w.demux * demux`;
/// higher is better.
pub fn score(m: &Metrics, w: &Weights) -> f64 {
    w.depth * m.depth_saving() + w.util * m.utilization - w.demux * m.demux as f64
}

/// A fused structure: its kind, size, members and the interval during which
/// it is in use.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HierNode {
    pub kind: Kind,
    pub depth: usize,
    pub members: Vec<String>,
    pub lifetime: Interval,
    pub in_ports: BTreeSet<String>,
    pub out_ports: BTreeSet<String>,
    /// Sum of member residencies in cycles.
    pub residency: Cycle,
}

impl HierNode {
    /// Register holding a single datum.
    pub fn register(d: &TimedDatum) -> Self {
        HierNode {
            kind: Kind::Register,
            depth: 1,
            members: vec![d.id.clone()],
            lifetime: d.lifetime(),
            in_ports: BTreeSet::from([d.write.port.clone()]),
            out_ports: d.reads.iter().map(|r| r.port.clone()).collect(),
            residency: d.residency(),
        }
    }

    /// FIFO lifetime runs from the first write to the last member's read;
    /// LIFO lifetime is the first member's, which encloses the others.
    pub fn from_path(g: &CompatGraph, p: &StructPath, depth: usize) -> Self {
        let first = g.node(p.nodes()[0]);
        let last = g.node(*p.nodes().last().expect("non-empty path"));
        let lifetime = match p.label() {
            Label::Fifo => Interval::new(first.tau_min(), last.tau_max()),
            _ => first.lifetime(),
        };
        debug_assert!(p.data(g).all(|d| d.tau_min() >= lifetime.start && d.tau_max() <= lifetime.end));
        HierNode {
            kind: p.label().into(),
            depth,
            members: p.ids(g),
            lifetime,
            in_ports: p.data(g).map(|d| d.write.port.clone()).collect(),
            out_ports: p.data(g).flat_map(|d| d.reads.iter().map(|r| r.port.clone())).collect(),
            residency: p.data(g).map(|d| d.residency()).sum(),
        }
    }

    pub fn demux(&self) -> usize {
        self.in_ports.len() + self.out_ports.len()
    }

    pub fn utilization(&self) -> f64 {
        utilization(self.residency, self.depth, self.lifetime.span())
    }

    pub fn metrics(&self) -> Metrics {
        Metrics { members: self.members.len(), depth: self.depth, demux: self.demux(), utilization: self.utilization() }
    }

    pub fn label(&self) -> String {
        format!("{}[{}] depth={}", self.kind, self.members.join(","), self.depth)
    }
}

pub(crate) fn utilization(residency: Cycle, depth: usize, span: Cycle) -> f64 {
    if depth == 0 || span == 0 {
        return 0.0;
    }
    residency as f64 / (depth as f64 * span as f64)
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub path: StructPath,
    pub node: HierNode,
    pub metrics: Metrics,
    pub score: f64,
}

impl Candidate {
    pub fn new(g: &CompatGraph, path: StructPath, w: &Weights) -> Self {
        let depth = path_depth(g, &path);
        let node = HierNode::from_path(g, &path, depth);
        let metrics = node.metrics();
        let score = score(&metrics, w);
        Candidate { path, node, metrics, score }
    }
}

/// Better candidates sort first: higher score, more members, earlier first
/// node, then lexicographic node indices.
pub fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.metrics.members.cmp(&a.metrics.members))
        .then(a.path.nodes().cmp(b.path.nodes()))
        .then(a.path.label().cmp(&b.path.label()))
}

/// One iteration of the greedy loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignStep {
    pub kind: Kind,
    pub members: Vec<String>,
    pub depth: usize,
    pub score: f64,
    pub candidates: usize,
}

#[derive(Debug, Clone)]
pub struct Assignment {
    /// FIFO and LIFO nodes in selection order.
    pub structures: Vec<HierNode>,
    /// Single-datum registers in chronological order.
    pub leftovers: Vec<HierNode>,
    pub trace: Vec<AssignStep>,
}

impl Assignment {
    pub fn nodes(&self) -> impl Iterator<Item = &HierNode> {
        self.structures.iter().chain(self.leftovers.iter())
    }

    pub fn into_nodes(self) -> Vec<HierNode> {
        let mut v = self.structures;
        v.extend(self.leftovers);
        v
    }

    pub fn total_cells(&self) -> usize {
        self.nodes().map(|n| n.depth).sum()
    }
}

/// All FIFO and LIFO candidates on the live nodes, best first.
pub fn candidates(g: &CompatGraph, alive: &[bool], w: &Weights) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = [Label::Fifo, Label::Lifo]
        .into_iter()
        .flat_map(|label| longest_paths_among(g, label, alive))
        .map(|p| Candidate::new(g, p, w))
        .collect();
    out.sort_by(rank);
    out
}

pub fn assign(g: &CompatGraph, w: &Weights) -> Assignment {
    let n = g.node_count();
    let mut alive = vec![true; n];
    let mut structures = Vec::new();
    let mut trace = Vec::new();
    loop {
        let cands = candidates(g, &alive, w);
        let count = cands.len();
        let Some(best) = cands.into_iter().next() else { break };
        for &i in best.path.nodes() {
            alive[i] = false;
        }
        trace.push(AssignStep {
            kind: best.node.kind,
            members: best.node.members.clone(),
            depth: best.node.depth,
            score: best.score,
            candidates: count,
        });
        structures.push(best.node);
    }
    let leftovers = (0..n).filter(|&i| alive[i]).map(|i| HierNode::register(g.node(i))).collect();
    Assignment { structures, leftovers, trace }
}
