//! The full flow: graph, assignment, merging, netlist and report.

use std::fmt::Write as _;

use thiserror::Error;

use crate::allocation::{assign, Assignment, Weights};
use crate::graph::{build_graph, CompatGraph, GraphError};
use crate::merge::{optimize, Optimization};
use crate::model::ConstraintSet;
use crate::netlist::{emit, Netlist, NetlistError, Summary};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Everything a build produces.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub graph: CompatGraph,
    pub assignment: Assignment,
    pub optimization: Optimization,
    pub netlist: Netlist,
    pub weights: Weights,
}

pub fn synthesize(cs: &ConstraintSet, weights: &Weights) -> Result<Synthesis, SynthError> {
    let graph = build_graph(cs)?;
    let assignment = assign(&graph, weights);
    let nodes: Vec<_> = assignment.nodes().cloned().collect();
    let optimization = optimize(&nodes, weights);
    let netlist = emit(&optimization.elements, cs)?;
    Ok(Synthesis { graph, assignment, optimization, netlist, weights: *weights })
}

fn opt(v: Option<usize>) -> String {
    v.map_or_else(|| "-".to_string(), |d| d.to_string())
}

/// One-line structure summary.
pub fn summary_line(s: &Summary) -> String {
    format!(
        "FIFO={}, LIFO={}, Reg={}, Mixed={}, Total={} structures, total cells={}",
        s.fifo, s.lifo, s.reg, s.mixed, s.total, s.total_cells
    )
}

/// Plain-text run report: graph statistics, assignment and merge traces,
/// and the structure table (counts per kind, largest/smallest FIFO and LIFO,
/// total cells).
pub fn write_report(cs: &ConstraintSet, syn: &Synthesis) -> String {
    let mut s = String::new();
    let summary = syn.netlist.summary();
    let counts = syn.graph.counts();
    let inputs = cs.ports().iter().filter(|p| p.dir == crate::model::Direction::Input).count();

    let _ = writeln!(s, "# star synthesis report");
    let _ = writeln!(s, "data: {}", cs.len());
    let _ = writeln!(s, "ports: in={} out={}", inputs, cs.ports().len() - inputs);
    let _ = writeln!(s, "weights: {}", syn.weights);
    let _ = writeln!(
        s,
        "graph: nodes={} edges={} R={} F={} L={} incompatible={}",
        syn.graph.node_count(),
        syn.graph.edge_count(),
        counts.register,
        counts.fifo,
        counts.lifo,
        counts.incompatible
    );

    let _ = writeln!(s, "\n## assignment");
    for (i, step) in syn.assignment.trace.iter().enumerate() {
        let _ = writeln!(
            s,
            "{:>4}. {} [{}] depth={} score={:.6} candidates={}",
            i + 1,
            step.kind,
            step.members.join(", "),
            step.depth,
            step.score,
            step.candidates
        );
    }
    let left: Vec<&str> = syn.assignment.leftovers.iter().flat_map(|n| n.members.iter()).map(String::as_str).collect();
    let _ = writeln!(s, "leftover registers ({}): {}", left.len(), left.join(", "));
    let _ = writeln!(s, "cells after assignment: {}", syn.assignment.total_cells());

    let _ = writeln!(s, "\n## optimization");
    for step in &syn.optimization.trace {
        let _ =
            writeln!(s, "merge into element #{}: {} (saves {} cell(s))", step.element, step.absorbed, step.cells_saved);
    }
    let _ = writeln!(s, "cells before={} after={}", syn.optimization.cells_before, syn.optimization.cells_after);

    let _ = writeln!(s, "\n## elements");
    for e in &syn.netlist.elements {
        let modes: Vec<String> =
            e.modes.iter().map(|m| format!("{}(d{})@[{},{}]", m.kind.name(), m.depth, m.from, m.to)).collect();
        let members = syn.netlist.binding.iter().filter(|(_, el)| **el == e.id).count();
        let _ = writeln!(s, "{} depth={} data={} modes={}", e.id, e.depth, members, modes.join(" "));
    }

    let _ = writeln!(s, "\n## summary");
    let _ = writeln!(
        s,
        "| FIFO | LIFO | Reg | Mixed | Total | Largest FIFO | Smallest FIFO | Largest LIFO | Smallest LIFO | Total cells |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|---|---|---|---|");
    let _ = writeln!(
        s,
        "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
        summary.fifo,
        summary.lifo,
        summary.reg,
        summary.mixed,
        summary.total,
        opt(summary.largest_fifo),
        opt(summary.smallest_fifo),
        opt(summary.largest_lifo),
        opt(summary.smallest_lifo),
        summary.total_cells
    );
    let _ = writeln!(s, "{}", summary_line(&summary));
    s
}
