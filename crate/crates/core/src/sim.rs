//! Cycle-accurate replay of a netlist against its constraint set.
//!
//! Each element is modelled as a FIFO queue, a LIFO stack or a single-slot
//! register, according to the mode active at the cycle of each operation.
//! Within a cycle all reads (pop/drive) execute before any write
//! (push/load), so a cell released at a datum's last read can take a new
//! datum in the same cycle.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::allocation::Kind;
use crate::model::{ConstraintSet, Cycle};
use crate::netlist::{MicroOp, Netlist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("read from an empty element")]
    Empty,
    #[error("write into a full element")]
    Full,
    #[error("drive of a register holding no datum")]
    Stale,
}

/// Storage state of one element in one mode.
#[derive(Debug, Clone)]
pub struct Storage {
    kind: Kind,
    items: VecDeque<String>,
}

impl Storage {
    pub fn new(kind: Kind) -> Self {
        Storage { kind, items: VecDeque::new() }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// FIFO: append at the tail. LIFO: push on top.
    pub fn push(&mut self, datum: impl Into<String>) {
        self.items.push_back(datum.into());
    }

    /// FIFO: remove the head. LIFO: remove the top.
    pub fn pop(&mut self) -> Result<String, StepError> {
        let item = match self.kind {
            Kind::Lifo => self.items.pop_back(),
            _ => self.items.pop_front(),
        };
        item.ok_or(StepError::Empty)
    }

    /// Register write into the single slot.
    pub fn load(&mut self, datum: impl Into<String>) -> Result<(), StepError> {
        if !self.items.is_empty() {
            return Err(StepError::Full);
        }
        self.items.push_back(datum.into());
        Ok(())
    }

    /// Register read; the slot is released.
    pub fn drive(&mut self) -> Result<String, StepError> {
        self.items.pop_front().ok_or(StepError::Stale)
    }

    fn switch(&mut self, kind: Kind) {
        self.kind = kind;
    }
}

/// Netlist does not describe the constraint set it is replayed against.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("datum `{0}` is not bound in the netlist")]
    Unbound(String),
    #[error("operation at cycle {t} refers to unknown element `{element}`")]
    UnknownElement { t: Cycle, element: String },
    #[error("datum `{datum}` is bound to unknown element `{element}`")]
    UnknownBinding { datum: String, element: String },
}

/// A point where the replay departs from the constraints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Divergence {
    FifoOrder { t: Cycle, element: String, expected: String, got: String },
    LifoOrder { t: Cycle, element: String, expected: String, got: String },
    RegisterMismatch { t: Cycle, element: String, expected: String, got: String },
    Underflow { t: Cycle, element: String, datum: String },
    StaleDrive { t: Cycle, element: String, datum: String },
    Overflow { t: Cycle, element: String, occupancy: usize, depth: usize },
    NoActiveMode { t: Cycle, element: String },
    OpKindMismatch { t: Cycle, element: String, mode: Kind },
    ModeConflict { t: Cycle, element: String, resident: usize },
    UnexpectedOutput { t: Cycle, port: String, datum: String },
    MissingOutput { t: Cycle, port: String, datum: String },
    UnexpectedWrite { t: Cycle, port: String, datum: String },
    MissingWrite { t: Cycle, port: String, datum: String },
    Residual { element: String, resident: usize },
}

impl Divergence {
    pub fn kind(&self) -> &'static str {
        match self {
            Divergence::FifoOrder { .. } => "FIFO order violated",
            Divergence::LifoOrder { .. } => "LIFO order violated",
            Divergence::RegisterMismatch { .. } => "register drive mismatch",
            Divergence::Underflow { .. } => "underflow",
            Divergence::StaleDrive { .. } => "stale drive",
            Divergence::Overflow { .. } => "overflow",
            Divergence::NoActiveMode { .. } => "no active mode",
            Divergence::OpKindMismatch { .. } => "operation does not match mode",
            Divergence::ModeConflict { .. } => "mode switch on non-empty element",
            Divergence::UnexpectedOutput { .. } => "unexpected output",
            Divergence::MissingOutput { .. } => "missing output",
            Divergence::UnexpectedWrite { .. } => "unexpected write",
            Divergence::MissingWrite { .. } => "missing write",
            Divergence::Residual { .. } => "residual data",
        }
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.kind();
        match self {
            Divergence::FifoOrder { t, element, expected, got }
            | Divergence::LifoOrder { t, element, expected, got }
            | Divergence::RegisterMismatch { t, element, expected, got } => {
                write!(f, "{k} at cycle {t}: `{element}` yielded `{got}`, schedule expects `{expected}`")
            }
            Divergence::Underflow { t, element, datum } | Divergence::StaleDrive { t, element, datum } => {
                write!(f, "{k} at cycle {t}: `{element}` is empty, schedule expects `{datum}`")
            }
            Divergence::Overflow { t, element, occupancy, depth } => {
                write!(f, "{k} at cycle {t}: `{element}` holds {occupancy} data, depth {depth}")
            }
            Divergence::NoActiveMode { t, element } => write!(f, "{k} at cycle {t} on `{element}`"),
            Divergence::OpKindMismatch { t, element, mode } => {
                write!(f, "{k} at cycle {t}: `{element}` is in {mode} mode")
            }
            Divergence::ModeConflict { t, element, resident } => {
                write!(f, "{k} at cycle {t}: `{element}` still holds {resident} data")
            }
            Divergence::UnexpectedOutput { t, port, datum }
            | Divergence::MissingOutput { t, port, datum }
            | Divergence::UnexpectedWrite { t, port, datum }
            | Divergence::MissingWrite { t, port, datum } => {
                write!(f, "{k} at cycle {t}: `{datum}` on port `{port}`")
            }
            Divergence::Residual { element, resident } => {
                write!(f, "{k}: `{element}` still holds {resident} data at end of run")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleTrace {
    pub t: Cycle,
    pub occupancy: BTreeMap<String, usize>,
    pub ops: Vec<MicroOp>,
    pub outputs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimTrace {
    pub cycles: Vec<CycleTrace>,
    pub divergences: Vec<Divergence>,
    pub peak_occupancy: BTreeMap<String, usize>,
    pub peak_total_occupancy: usize,
    pub pushes: BTreeMap<String, usize>,
    pub pops: BTreeMap<String, usize>,
    pub cells: usize,
}

impl SimTrace {
    pub fn passed(&self) -> bool {
        self.divergences.is_empty()
    }

    pub fn first_divergence(&self) -> Option<&Divergence> {
        self.divergences.first()
    }

    pub fn verdict(&self) -> String {
        match self.first_divergence() {
            None => "pass".to_string(),
            Some(d) => format!("fail: {d}"),
        }
    }

    /// One JSON object per cycle, then a closing verdict line.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for c in &self.cycles {
            s.push_str(&serde_json::to_string(c).expect("trace serializes"));
            s.push('\n');
        }
        #[derive(Serialize)]
        struct Tail<'a> {
            verdict: String,
            divergences: &'a [Divergence],
            peak_total_occupancy: usize,
            cells: usize,
        }
        let tail = Tail {
            verdict: self.verdict(),
            divergences: &self.divergences,
            peak_total_occupancy: self.peak_total_occupancy,
            cells: self.cells,
        };
        s.push_str(&serde_json::to_string(&tail).expect("trace serializes"));
        s.push('\n');
        s
    }
}

struct ElementSim<'n> {
    element: &'n crate::netlist::Element,
    storage: Storage,
    active: Option<usize>,
}

impl ElementSim<'_> {
    /// Makes `mode` active, failing if the element still holds data from
    /// another mode.
    fn enter(&mut self, mode: usize, t: Cycle, out: &mut Vec<Divergence>) {
        if self.active == Some(mode) {
            return;
        }
        if !self.storage.is_empty() {
            out.push(Divergence::ModeConflict { t, element: self.element.id.clone(), resident: self.storage.len() });
        }
        self.active = Some(mode);
        self.storage.switch(self.element.modes[mode].kind);
    }
}

pub fn simulate(n: &Netlist, cs: &ConstraintSet) -> Result<SimTrace, SimError> {
    let mut elements: BTreeMap<&str, ElementSim> = n
        .elements
        .iter()
        .map(|e| {
            let kind = e.modes.first().map_or(Kind::Fifo, |m| m.kind);
            (e.id.as_str(), ElementSim { element: e, storage: Storage::new(kind), active: None })
        })
        .collect();

    for d in cs.data() {
        let el = n.binding.get(&d.id).ok_or_else(|| SimError::Unbound(d.id.clone()))?;
        if !elements.contains_key(el.as_str()) {
            return Err(SimError::UnknownBinding { datum: d.id.clone(), element: el.clone() });
        }
    }
    for c in &n.schedule {
        for op in &c.ops {
            if !elements.contains_key(op.element()) {
                return Err(SimError::UnknownElement { t: c.t, element: op.element().to_string() });
            }
        }
    }

    let mut expected_writes: BTreeSet<(Cycle, &str, &str)> = BTreeSet::new();
    let mut expected_reads: BTreeSet<(Cycle, String, String)> = BTreeSet::new();
    for d in cs.data() {
        expected_writes.insert((d.write.t, &d.write.port, &d.id));
        for r in &d.reads {
            expected_reads.insert((r.t, r.port.clone(), d.id.clone()));
        }
    }

    let schedule: BTreeMap<Cycle, &[MicroOp]> = n.schedule.iter().map(|c| (c.t, c.ops.as_slice())).collect();
    let end = cs.max_time().into_iter().chain(schedule.keys().next_back().copied()).max();

    let mut div = Vec::new();
    let mut cycles = Vec::new();
    let mut peak: BTreeMap<String, usize> = n.elements.iter().map(|e| (e.id.clone(), 0)).collect();
    let mut pushes: BTreeMap<String, usize> = peak.clone();
    let mut pops: BTreeMap<String, usize> = peak.clone();
    let mut peak_total = 0;

    for t in end.map_or(0..0, |e| 0..e + 1) {
        let ops: &[MicroOp] = schedule.get(&t).copied().unwrap_or(&[]);
        let mut outputs = Vec::new();

        for op in ops.iter().filter(|op| op.is_read()) {
            let es = elements.get_mut(op.element()).expect("checked above");
            let id = &es.element.id;
            *pops.get_mut(id).expect("known element") += 1;
            let Some(mode) = es.element.mode_for_read(t) else {
                div.push(Divergence::NoActiveMode { t, element: id.clone() });
                continue;
            };
            let kind = es.element.modes[mode].kind;
            let is_drive = matches!(op, MicroOp::Drive { .. });
            if is_drive != (kind == Kind::Register) {
                div.push(Divergence::OpKindMismatch { t, element: id.clone(), mode: kind });
            }
            es.enter(mode, t, &mut div);
            let id = es.element.id.clone();
            let expected = op.datum().to_string();
            let got = if kind == Kind::Register { es.storage.drive() } else { es.storage.pop() };
            match got {
                Err(_) if kind == Kind::Register => {
                    div.push(Divergence::StaleDrive { t, element: id, datum: expected });
                }
                Err(_) => div.push(Divergence::Underflow { t, element: id, datum: expected }),
                Ok(got) => {
                    if got != expected {
                        let d = match kind {
                            Kind::Fifo => Divergence::FifoOrder { t, element: id, expected, got: got.clone() },
                            Kind::Lifo => Divergence::LifoOrder { t, element: id, expected, got: got.clone() },
                            Kind::Register => {
                                Divergence::RegisterMismatch { t, element: id, expected, got: got.clone() }
                            }
                        };
                        div.push(d);
                    }
                    if !expected_reads.remove(&(t, op.port().to_string(), got.clone())) {
                        div.push(Divergence::UnexpectedOutput { t, port: op.port().to_string(), datum: got.clone() });
                    }
                    outputs.push((op.port().to_string(), got));
                }
            }
        }

        for op in ops.iter().filter(|op| !op.is_read()) {
            let es = elements.get_mut(op.element()).expect("checked above");
            let id = es.element.id.clone();
            *pushes.get_mut(&id).expect("known element") += 1;
            if !expected_writes.remove(&(t, op.port(), op.datum())) {
                div.push(Divergence::UnexpectedWrite { t, port: op.port().to_string(), datum: op.datum().to_string() });
            }
            let Some(mode) = es.element.mode_for_write(t) else {
                div.push(Divergence::NoActiveMode { t, element: id });
                continue;
            };
            let m = &es.element.modes[mode];
            let (kind, mode_depth) = (m.kind, m.depth);
            let is_load = matches!(op, MicroOp::Load { .. });
            if is_load != (kind == Kind::Register) {
                div.push(Divergence::OpKindMismatch { t, element: id.clone(), mode: kind });
            }
            es.enter(mode, t, &mut div);
            // a load into an occupied register is still stored so the
            // overflow check below reports it
            if kind != Kind::Register || es.storage.load(op.datum()).is_err() {
                es.storage.push(op.datum());
            }
            let limit = mode_depth.min(es.element.depth);
            if es.storage.len() > limit {
                div.push(Divergence::Overflow { t, element: id, occupancy: es.storage.len(), depth: limit });
            }
        }

        let occupancy: BTreeMap<String, usize> =
            elements.values().map(|es| (es.element.id.clone(), es.storage.len())).collect();
        let total: usize = occupancy.values().sum();
        peak_total = peak_total.max(total);
        for (id, &occ) in &occupancy {
            let p = peak.get_mut(id).expect("known element");
            *p = (*p).max(occ);
        }
        cycles.push(CycleTrace { t, occupancy, ops: ops.to_vec(), outputs });
    }

    for (t, port, datum) in expected_writes {
        div.push(Divergence::MissingWrite { t, port: port.to_string(), datum: datum.to_string() });
    }
    for (t, port, datum) in expected_reads {
        div.push(Divergence::MissingOutput { t, port, datum });
    }
    for es in elements.values() {
        if !es.storage.is_empty() {
            div.push(Divergence::Residual { element: es.element.id.clone(), resident: es.storage.len() });
        }
    }

    Ok(SimTrace {
        cycles,
        divergences: div,
        peak_occupancy: peak,
        peak_total_occupancy: peak_total,
        pushes,
        pops,
        cells: n.total_cells(),
    })
}
