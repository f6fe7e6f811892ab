//! Final architecture: storage elements, data binding, interconnect and a
//! per-cycle control schedule.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocation::Kind;
use crate::merge::MergedElement;
use crate::model::{ConstraintSet, Cycle};

pub const NETLIST_SCHEMA_VERSION: u32 = 1;

/// Behaviour of an element over one lifetime interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mode {
    pub from: Cycle,
    pub to: Cycle,
    pub kind: Kind,
    /// Cells used by the structure active in this interval.
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub id: String,
    pub depth: usize,
    pub modes: Vec<Mode>,
}

impl Element {
    pub fn uniform_kind(&self) -> Option<Kind> {
        let first = self.modes.first()?.kind;
        self.modes.iter().all(|m| m.kind == first).then_some(first)
    }

    /// Mode active for a write (or load) at `t`: `from <= t < to`.
    pub fn mode_for_write(&self, t: Cycle) -> Option<usize> {
        self.modes.iter().position(|m| m.from <= t && t < m.to)
    }

    /// Mode active for a read (or drive) at `t`: `from < t <= to`.
    pub fn mode_for_read(&self, t: Cycle) -> Option<usize> {
        self.modes.iter().position(|m| m.from < t && t <= m.to)
    }
}

/// Control micro-operation. FIFO and LIFO elements are written with `push`
/// and read with `pop`; registers use `load` and `drive`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum MicroOp {
    Pop { element: String, port: String, datum: String },
    Drive { element: String, port: String, datum: String },
    Push { port: String, element: String, datum: String },
    Load { port: String, element: String, datum: String },
}

impl MicroOp {
    pub fn element(&self) -> &str {
        match self {
            MicroOp::Pop { element, .. }
            | MicroOp::Drive { element, .. }
            | MicroOp::Push { element, .. }
            | MicroOp::Load { element, .. } => element,
        }
    }

    pub fn port(&self) -> &str {
        match self {
            MicroOp::Pop { port, .. }
            | MicroOp::Drive { port, .. }
            | MicroOp::Push { port, .. }
            | MicroOp::Load { port, .. } => port,
        }
    }

    pub fn datum(&self) -> &str {
        match self {
            MicroOp::Pop { datum, .. }
            | MicroOp::Drive { datum, .. }
            | MicroOp::Push { datum, .. }
            | MicroOp::Load { datum, .. } => datum,
        }
    }

    pub fn is_read(&self) -> bool {
        matches!(self, MicroOp::Pop { .. } | MicroOp::Drive { .. })
    }

    fn write_for(kind: Kind, port: &str, element: &str, datum: &str) -> Self {
        let (port, element, datum) = (port.to_string(), element.to_string(), datum.to_string());
        match kind {
            Kind::Register => MicroOp::Load { port, element, datum },
            _ => MicroOp::Push { port, element, datum },
        }
    }

    fn read_for(kind: Kind, element: &str, port: &str, datum: &str) -> Self {
        let (port, element, datum) = (port.to_string(), element.to_string(), datum.to_string());
        match kind {
            Kind::Register => MicroOp::Drive { element, port, datum },
            _ => MicroOp::Pop { element, port, datum },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleCycle {
    pub t: Cycle,
    pub ops: Vec<MicroOp>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interconnect {
    /// Input port -> elements it feeds.
    pub inputs: BTreeMap<String, BTreeSet<String>>,
    /// Element -> output ports it serves.
    pub outputs: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Netlist {
    pub version: u32,
    pub elements: Vec<Element>,
    pub binding: BTreeMap<String, String>,
    pub interconnect: Interconnect,
    /// Cycles with at least one operation, in increasing time.
    pub schedule: Vec<ScheduleCycle>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetlistError {
    #[error("datum `{0}` is not bound to any element")]
    Unbound(String),
    #[error("datum `{0}` is bound to more than one element")]
    DoubleBound(String),
    #[error("element member `{0}` is not in the constraint set")]
    UnknownDatum(String),
    #[error("datum `{0}` is read more than once")]
    MultiRead(String),
}

/// Structure counts and extreme depths of an architecture.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub fifo: usize,
    pub lifo: usize,
    pub reg: usize,
    pub mixed: usize,
    pub total: usize,
    pub largest_fifo: Option<usize>,
    pub smallest_fifo: Option<usize>,
    pub largest_lifo: Option<usize>,
    pub smallest_lifo: Option<usize>,
    pub total_cells: usize,
}

impl Netlist {
    pub fn empty() -> Self {
        Netlist {
            version: NETLIST_SCHEMA_VERSION,
            elements: Vec::new(),
            binding: BTreeMap::new(),
            interconnect: Interconnect::default(),
            schedule: Vec::new(),
        }
    }

    pub fn element(&self, id: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }

    pub fn op_count(&self) -> usize {
        self.schedule.iter().map(|c| c.ops.len()).sum()
    }

    pub fn total_cells(&self) -> usize {
        self.elements.iter().map(|e| e.depth).sum()
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary { total: self.elements.len(), total_cells: self.total_cells(), ..Summary::default() };
        for e in &self.elements {
            match e.uniform_kind() {
                Some(Kind::Fifo) => s.fifo += 1,
                Some(Kind::Lifo) => s.lifo += 1,
                Some(Kind::Register) => s.reg += 1,
                None => s.mixed += 1,
            }
        }
        let depths = |kind: Kind| {
            self.elements.iter().flat_map(|e| e.modes.iter()).filter(move |m| m.kind == kind).map(|m| m.depth)
        };
        s.largest_fifo = depths(Kind::Fifo).max();
        s.smallest_fifo = depths(Kind::Fifo).min();
        s.largest_lifo = depths(Kind::Lifo).max();
        s.smallest_lifo = depths(Kind::Lifo).min();
        s
    }
}

/// Builds elements, binding, interconnect and schedule from merged elements.
///
/// Element ids are the kind name (`fifo`, `lifo`, `reg`, or `mix` for
/// elements whose modes differ) followed by a per-kind ordinal in the order
/// the elements are given.
pub fn emit(merged: &[MergedElement], cs: &ConstraintSet) -> Result<Netlist, NetlistError> {
    let mut netlist = Netlist::empty();
    let mut ordinals: BTreeMap<&'static str, usize> = BTreeMap::new();
    // datum -> (element index, kind)
    let mut placement: BTreeMap<&str, (usize, Kind)> = BTreeMap::new();

    for (idx, m) in merged.iter().enumerate() {
        let prefix = m.uniform_kind().map_or("mix", Kind::name);
        let ord = ordinals.entry(prefix).or_default();
        let id = format!("{prefix}{ord}");
        *ord += 1;
        let modes = m
            .modes
            .iter()
            .map(|h| Mode { from: h.lifetime.start, to: h.lifetime.end, kind: h.kind, depth: h.depth })
            .collect();
        netlist.elements.push(Element { id, depth: m.depth(), modes });
        for h in &m.modes {
            for datum in &h.members {
                if cs.datum(datum).is_none() {
                    return Err(NetlistError::UnknownDatum(datum.clone()));
                }
                if placement.insert(datum.as_str(), (idx, h.kind)).is_some() {
                    return Err(NetlistError::DoubleBound(datum.clone()));
                }
            }
        }
    }

    let mut by_cycle: BTreeMap<Cycle, Vec<MicroOp>> = BTreeMap::new();
    for d in cs.data() {
        let &(idx, kind) = placement.get(d.id.as_str()).ok_or_else(|| NetlistError::Unbound(d.id.clone()))?;
        if d.reads.len() != 1 {
            return Err(NetlistError::MultiRead(d.id.clone()));
        }
        let el = &netlist.elements[idx].id;
        netlist.binding.insert(d.id.clone(), el.clone());
        netlist.interconnect.inputs.entry(d.write.port.clone()).or_default().insert(el.clone());
        by_cycle.entry(d.write.t).or_default().push(MicroOp::write_for(kind, &d.write.port, el, &d.id));
        for r in &d.reads {
            netlist.interconnect.outputs.entry(el.clone()).or_default().insert(r.port.clone());
            by_cycle.entry(r.t).or_default().push(MicroOp::read_for(kind, el, &r.port, &d.id));
        }
    }
    // reads sort before writes (enum order), then by element/port/datum
    netlist.schedule = by_cycle
        .into_iter()
        .map(|(t, mut ops)| {
            ops.sort();
            ScheduleCycle { t, ops }
        })
        .collect();
    Ok(netlist)
}

pub fn write_netlist(n: &Netlist) -> String {
    crate::canonical_json(n)
}

pub fn parse_netlist(text: &str) -> Result<Netlist, serde_json::Error> {
    serde_json::from_str(text)
}

/// Human-readable pseudo-HDL listing of a netlist. Not meant for synthesis.
pub fn to_pseudo_hdl(n: &Netlist, cs: &ConstraintSet) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "-- pseudo-HDL listing, for inspection only");
    let _ = writeln!(s, "entity star is");
    let _ = writeln!(s, "  port (");
    for p in cs.ports() {
        let dir = match p.dir {
            crate::model::Direction::Input => "in ",
            crate::model::Direction::Output => "out",
        };
        let _ = writeln!(s, "    {} : {} word;", p.name, dir);
    }
    let _ = writeln!(s, "  );");
    let _ = writeln!(s, "end entity;");
    let _ = writeln!(s);
    let _ = writeln!(s, "architecture adapter of star is");
    for e in &n.elements {
        let modes: Vec<String> = e.modes.iter().map(|m| format!("{}@[{},{}]", m.kind.name(), m.from, m.to)).collect();
        let _ = writeln!(s, "  {} : buffer generic map (depth => {}); -- {}", e.id, e.depth, modes.join(" "));
    }
    let _ = writeln!(s, "begin");
    for (port, els) in &n.interconnect.inputs {
        let els: Vec<&str> = els.iter().map(String::as_str).collect();
        let _ = writeln!(s, "  {port} => demux({});", els.join(", "));
    }
    for (el, ports) in &n.interconnect.outputs {
        let ports: Vec<&str> = ports.iter().map(String::as_str).collect();
        let _ = writeln!(s, "  {el} => mux({});", ports.join(", "));
    }
    let _ = writeln!(s, "  control: process(clk)");
    for c in &n.schedule {
        let ops: Vec<String> = c
            .ops
            .iter()
            .map(|op| match op {
                MicroOp::Push { port, element, datum } => format!("push {element} <- {port} ({datum})"),
                MicroOp::Load { port, element, datum } => format!("load {element} <- {port} ({datum})"),
                MicroOp::Pop { element, port, datum } => format!("pop {element} -> {port} ({datum})"),
                MicroOp::Drive { element, port, datum } => format!("drive {element} -> {port} ({datum})"),
            })
            .collect();
        let _ = writeln!(s, "    when {} => {};", c.t, ops.join("; "));
    }
    let _ = writeln!(s, "  end process;");
    let _ = writeln!(s, "end architecture;");
    s
}
