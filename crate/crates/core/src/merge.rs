//! Sharing physical elements between structures whose lifetimes never
//! overlap.
//!
//! A merged element carries several lifetime intervals, one per member
//! structure, and behaves as that structure's kind during each of them.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::allocation::{utilization, HierNode, Kind, Weights};
use crate::model::Interval;

/// Anything that occupies storage over a set of intervals.
pub trait Lifetimes {
    fn intervals(&self) -> Vec<Interval>;
}

impl Lifetimes for HierNode {
    fn intervals(&self) -> Vec<Interval> {
        vec![self.lifetime]
    }
}

impl Lifetimes for MergedElement {
    fn intervals(&self) -> Vec<Interval> {
        self.modes.iter().map(|m| m.lifetime).collect()
    }
}

impl Lifetimes for Interval {
    fn intervals(&self) -> Vec<Interval> {
        vec![*self]
    }
}

impl Lifetimes for Vec<Interval> {
    fn intervals(&self) -> Vec<Interval> {
        self.clone()
    }
}

/// True iff no interval of `x` overlaps an interval of `y`; intervals that
/// only touch at one cycle do not overlap.
pub fn register_compatible<X: Lifetimes + ?Sized, Y: Lifetimes + ?Sized>(x: &X, y: &Y) -> bool {
    let ys = y.intervals();
    x.intervals().iter().all(|a| ys.iter().all(|b| a.disjoint(b)))
}

/// One physical element shared by time-disjoint structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedElement {
    /// Member structures ordered by lifetime start.
    pub modes: Vec<HierNode>,
}

impl MergedElement {
    pub fn single(node: HierNode) -> Self {
        MergedElement { modes: vec![node] }
    }

    pub fn depth(&self) -> usize {
        self.modes.iter().map(|m| m.depth).max().unwrap_or(0)
    }

    /// The common kind of every mode, or `None` for a mixed element.
    pub fn uniform_kind(&self) -> Option<Kind> {
        let first = self.modes.first()?.kind;
        self.modes.iter().all(|m| m.kind == first).then_some(first)
    }

    pub fn members(&self) -> impl Iterator<Item = &String> {
        self.modes.iter().flat_map(|m| m.members.iter())
    }

    pub fn first_start(&self) -> u64 {
        self.modes.iter().map(|m| m.lifetime.start).min().unwrap_or(0)
    }

    fn absorb(&mut self, other: MergedElement) {
        self.modes.extend(other.modes);
        self.modes.sort_by(|a, b| (a.lifetime, &a.members).cmp(&(b.lifetime, &b.members)));
    }

    fn demux(&self) -> usize {
        let ins: BTreeSet<&String> = self.modes.iter().flat_map(|m| m.in_ports.iter()).collect();
        let outs: BTreeSet<&String> = self.modes.iter().flat_map(|m| m.out_ports.iter()).collect();
        ins.len() + outs.len()
    }

    fn utilization(&self) -> f64 {
        let residency = self.modes.iter().map(|m| m.residency).sum();
        let span = self.modes.iter().map(|m| m.lifetime.span()).sum();
        utilization(residency, self.depth(), span)
    }

    pub fn label(&self) -> String {
        self.modes.iter().map(|m| m.label()).collect::<Vec<_>>().join(" | ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeStep {
    /// Index of the receiving element in the output.
    pub element: usize,
    pub absorbed: String,
    pub cells_saved: usize,
}

#[derive(Debug, Clone)]
pub struct Optimization {
    pub elements: Vec<MergedElement>,
    pub trace: Vec<MergeStep>,
    pub cells_before: usize,
    pub cells_after: usize,
}

pub fn total_cells(elements: &[MergedElement]) -> usize {
    elements.iter().map(|e| e.depth()).sum()
}

/// Merges hierarchical nodes from the assignment step.
pub fn optimize(nodes: &[HierNode], w: &Weights) -> Optimization {
    merge_elements(nodes.iter().cloned().map(MergedElement::single).collect(), w)
}

/// Greedy first-fit-decreasing merge.
///
/// Units are visited by decreasing depth. Each joins the register-compatible
/// element that scores best on the weighted utilization/demux metrics, or
/// opens a new element. Because every existing element is at least as deep
/// as the unit being placed, each join saves exactly that unit's depth. The
/// result admits no further merge, so a second pass leaves it unchanged.
pub fn merge_elements(units: Vec<MergedElement>, w: &Weights) -> Optimization {
    let cells_before = total_cells(&units);
    let mut units = units;
    units.sort_by(|a, b| {
        b.depth().cmp(&a.depth()).then(a.first_start().cmp(&b.first_start())).then_with(|| a.members().cmp(b.members()))
    });

    let mut elements: Vec<MergedElement> = Vec::new();
    let mut trace = Vec::new();
    for unit in units {
        let mut best: Option<(usize, f64)> = None;
        for (idx, e) in elements.iter().enumerate() {
            if !register_compatible(e, &unit) {
                continue;
            }
            let mut trial = e.clone();
            trial.absorb(unit.clone());
            let s = w.util * trial.utilization() - w.demux * trial.demux() as f64;
            if best.is_none_or(|(_, bs)| s > bs) {
                best = Some((idx, s));
            }
        }
        match best {
            Some((idx, _)) => {
                trace.push(MergeStep { element: idx, absorbed: unit.label(), cells_saved: unit.depth() });
                elements[idx].absorb(unit);
            }
            None => elements.push(unit),
        }
    }
    let cells_after = total_cells(&elements);
    debug_assert!(cells_after <= cells_before);
    Optimization { elements, trace, cells_before, cells_after }
}
